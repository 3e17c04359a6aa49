#include <gtest/gtest.h>

#include "cbmm/solvers.hpp"

using namespace cbmm;

namespace {

/// F(x, y) = x y on [-1, 1]^2.
struct Bilinear {
    double value(ConstSpan x, ConstSpan y) const { return x[0] * y[0]; }
    OracleAnswer subgradients(ConstSpan x, ConstSpan y) const { return {{y[0]}, {-x[0]}}; }
    double bound_x() const { return 1.0; }
    double bound_y() const { return 1.0; }
};

/// F(x, p) = <p, l> with no dependence on x.
struct ConstantLosses {
    Vector l;
    double value(ConstSpan, ConstSpan p) const { return dot(p, l); }
    OracleAnswer subgradients(ConstSpan x, ConstSpan) const {
        return {Vector(x.size(), 0.0), scaled(l, -1.0)};
    }
    double bound_x() const { return 1.0; }
    double bound_y() const { return 1.0; }
};

/// Reports an artificially small gradient bound.
struct Misbounded {
    double value(ConstSpan x, ConstSpan y) const { return x[0] * y[0]; }
    OracleAnswer subgradients(ConstSpan x, ConstSpan y) const { return {{2.0 + y[0]}, {-x[0]}}; }
    double bound_x() const { return 1.0; }
    double bound_y() const { return 1.0; }
};

const SyntheticProblem kSynthetic(0.5, 5.0, 5.0);

double final_gap(const SolverOutput& out) { return duality_gap(kSynthetic, out.x_bar, out.y_bar).value; }

}  // namespace

TEST(CbMinMax, SaddleStartStaysPut) {
    SolverOptions opt;
    opt.recorder = [](const Snapshot& s, RunRecord& r) { r.gap = duality_gap(kSynthetic, s.x_bar, s.y_bar).value; };
    const auto out =
        cb_min_max(kSynthetic, kSynthetic.x_set(), kSynthetic.y_set(), Vector{0.0}, Vector{0.0}, 500, opt);
    EXPECT_EQ(out.x_bar, (Vector{0.0}));
    EXPECT_EQ(out.y_bar, (Vector{0.0}));
    for (const auto& r : out.trace) EXPECT_EQ(*r.gap, 0.0);
}

TEST(CbMinMax, BilinearFirstRounds) {
    const Bilinear f;
    const auto box = FeasibleSet::box(1.0, 1);
    // x0-centered: surrogates 0.5 and -0.5 give x~2 = 1 - 0.25, y~2 = 1 + 0.25.
    SolverOptions x0c;
    x0c.centering = Centering::initial_point;
    x0c.record_every = 1;
    x0c.recorder = [](const Snapshot& s, RunRecord& r) { r.regret_x = s.x_last[0]; r.regret_y = s.y_last[0]; };
    auto out = cb_min_max(f, box, box, Vector{1.0}, Vector{1.0}, 2, x0c);
    EXPECT_EQ(*out.trace[0].regret_x, 1.0);
    EXPECT_EQ(*out.trace[0].regret_y, 1.0);
    EXPECT_EQ(*out.trace[1].regret_x, 0.75);
    EXPECT_EQ(*out.trace[1].regret_y, 1.0);  // 1.25 projected
    // origin-centered: the first bets start from zero.
    SolverOptions oc = x0c;
    oc.centering = Centering::origin;
    out = cb_min_max(f, box, box, Vector{1.0}, Vector{1.0}, 2, oc);
    EXPECT_EQ(*out.trace[1].regret_x, -0.25);
    EXPECT_EQ(*out.trace[1].regret_y, 0.25);
}

TEST(CbMinMax, BeatsPdgOnSynthetic) {
    for (double start : {1.0, 0.1}) {
        const auto X = kSynthetic.x_set();
        const auto Y = kSynthetic.y_set();
        const auto cb = cb_min_max(kSynthetic, X, Y, Vector{start}, Vector{start}, 10000);
        const double eta = pdg_default_step(X.diameter(), kSynthetic.bound_x(), 10000);
        const auto pdg = primal_dual_gradient(kSynthetic, X, Y, Vector{start}, Vector{start}, 10000, eta, eta,
                                              DualGeometry::euclidean);
        EXPECT_LT(std::hypot(cb.x_bar[0], cb.y_bar[0]), std::hypot(pdg.x_bar[0], pdg.y_bar[0])) << start;
    }
}

TEST(CbMinMax, GapDecays) {
    double prev = final_gap(
        cb_min_max(kSynthetic, kSynthetic.x_set(), kSynthetic.y_set(), Vector{1.0}, Vector{1.0}, 250));
    for (std::size_t T : {1000u, 4000u}) {
        const double g =
            final_gap(cb_min_max(kSynthetic, kSynthetic.x_set(), kSynthetic.y_set(), Vector{1.0}, Vector{1.0}, T));
        EXPECT_LE(g, 0.7 * prev) << T;
        prev = g;
    }
}

TEST(CbMinMax, CloserStartGivesSmallerGap) {
    const auto X = kSynthetic.x_set();
    const auto Y = kSynthetic.y_set();
    const double far = final_gap(cb_min_max(kSynthetic, X, Y, Vector{1.0}, Vector{1.0}, 2000));
    const double near = final_gap(cb_min_max(kSynthetic, X, Y, Vector{0.1}, Vector{0.1}, 2000));
    EXPECT_LT(near, far);
}

TEST(CbMinMax, OneOracleCallPerIterationAndFeasibility) {
    const auto out = cb_min_max(kSynthetic, kSynthetic.x_set(), kSynthetic.y_set(), Vector{1.0}, Vector{-2.0}, 777);
    EXPECT_EQ(out.diagnostics.oracle_calls, 777u);
    EXPECT_EQ(out.diagnostics.feasibility_violations, 0u);
    EXPECT_LE(out.diagnostics.max_scaled_grad_x, 1.0 + 1e-9);
    EXPECT_GT(out.diagnostics.min_wealth_x, 0.0);
    EXPECT_GT(out.diagnostics.min_wealth_y, 0.0);
    EXPECT_EQ(out.stage_ends, (std::vector<std::size_t>{777}));
}

TEST(CbMinMax, TraceCadence) {
    const auto X = kSynthetic.x_set();
    const auto Y = kSynthetic.y_set();
    auto out = cb_min_max(kSynthetic, X, Y, Vector{1.0}, Vector{1.0}, 10000);
    ASSERT_EQ(out.trace.size(), 1000u);
    EXPECT_EQ(out.trace.front().iteration, 10u);
    EXPECT_EQ(out.trace.back().iteration, 10000u);
    SolverOptions opt;
    opt.record_every = 300;
    out = cb_min_max(kSynthetic, X, Y, Vector{1.0}, Vector{1.0}, 1000, opt);
    std::vector<std::size_t> its;
    for (const auto& r : out.trace) its.push_back(r.iteration);
    EXPECT_EQ(its, (std::vector<std::size_t>{300, 600, 900, 1000}));
}

TEST(CbMinMax, AverageIsExactMeanOfPlays) {
    const auto X = kSynthetic.x_set();
    const auto Y = kSynthetic.y_set();
    Vector sx{0.0};
    SolverOptions opt;
    opt.record_every = 1;
    opt.recorder = [&sx](const Snapshot& s, RunRecord&) { sx[0] += s.x_last[0]; };
    const auto out = cb_min_max(kSynthetic, X, Y, Vector{1.0}, Vector{1.0}, 37, opt);
    EXPECT_EQ(out.x_bar[0], sx[0] * (1.0 / 37.0));
}

TEST(CbMinMax, Deterministic) {
    const auto X = kSynthetic.x_set();
    const auto Y = kSynthetic.y_set();
    const auto a = cb_min_max(kSynthetic, X, Y, Vector{1.0}, Vector{1.0}, 3000);
    const auto b = cb_min_max(kSynthetic, X, Y, Vector{1.0}, Vector{1.0}, 3000);
    EXPECT_EQ(a.x_bar, b.x_bar);
    EXPECT_EQ(a.y_bar, b.y_bar);
}

TEST(CbMinMax, Validation) {
    const auto X = kSynthetic.x_set();
    EXPECT_THROW(cb_min_max(kSynthetic, X, X, Vector{6.0}, Vector{0.0}, 10), InvalidArgument);
    EXPECT_THROW(cb_min_max(kSynthetic, X, X, Vector{0.0}, Vector{0.0}, 0), InvalidArgument);
    const Misbounded m;
    try {
        cb_min_max(m, X, X, Vector{0.0}, Vector{0.0}, 10);
        FAIL();
    } catch (const ScalingViolation& e) {
        EXPECT_EQ(e.iteration(), 1u);
    }
}

TEST(CbMinMaxSimplex, ConstantLossesLeaveXAtStart) {
    const ConstantLosses f{{0.2, 0.9, 0.4}};
    const auto X = FeasibleSet::ball(1.0, 2);
    SolverOptions opt;
    opt.centering = Centering::initial_point;
    const auto out = cb_min_max_simplex(f, X, Vector{0.3, -0.1}, Vector(3, 1.0 / 3.0), 200, opt);
    EXPECT_NEAR(out.x_bar[0], 0.3, 1e-13);
    EXPECT_NEAR(out.x_bar[1], -0.1, 1e-13);
    // Origin centering plays the start once, then the origin.
    const auto origin = cb_min_max_simplex(f, X, Vector{0.3, -0.1}, Vector(3, 1.0 / 3.0), 200);
    EXPECT_NEAR(origin.x_bar[0], 0.3 / 200, 1e-15);
    EXPECT_NEAR(origin.x_bar[1], -0.1 / 200, 1e-15);
    // Mass moves toward the highest loss (the maximizing player).
    EXPECT_GT(out.y_bar[1], out.y_bar[0]);
    EXPECT_GT(out.y_bar[1], out.y_bar[2]);
}

TEST(CbMinMaxSimplex, IdenticalSamplesKeepUniform) {
    Dataset ds;
    ds.dimension = 2;
    ds.samples.push_back({SparseVector({{0, 1.0}, {1, -0.5}}), 1.0});
    ds.samples.push_back(ds.samples[0]);
    const DroProblem p(ds, {});
    const auto out = cb_min_max_simplex(p, p.w_set(), Vector(2, 0.0), p.uniform(), 300);
    EXPECT_EQ(out.y_bar, (Vector{0.5, 0.5}));
}

TEST(CbMinMaxSimplex, BeatsEntropicPdgOnDeskDro) {
    const DroProblem p(generate_dataset(200, 20, 42), {});
    const auto cb = cb_min_max_simplex(p, p.w_set(), Vector(20, 0.0), p.uniform(), 1000);
    const DroSteps s = pdg_dro_steps(p, 1000);
    const auto pdg = primal_dual_gradient(p, p.w_set(), p.p_set(), Vector(20, 0.0), p.uniform(), 1000, s.eta_w,
                                          s.eta_p, DualGeometry::entropic);
    EXPECT_LE(robust_objective(p, cb.x_bar), robust_objective(p, pdg.x_bar));
    EXPECT_EQ(cb.diagnostics.feasibility_violations, 0u);
    EXPECT_EQ(cb.diagnostics.oracle_calls, 1000u);
    EXPECT_LE(std::abs(sum(cb.y_bar) - 1.0), 1e-12);
}

TEST(CbMinMaxSimplex, RejectsBoundaryPrior) {
    const ConstantLosses f{{0.2, 0.9}};
    const auto X = FeasibleSet::ball(1.0, 1);
    EXPECT_THROW(cb_min_max_simplex(f, X, Vector{0.0}, Vector{1.0, 0.0}, 10), InvalidArgument);
    EXPECT_THROW(cb_min_max_simplex(f, X, Vector{0.0}, Vector{0.6, 0.6}, 10), InvalidArgument);
}

TEST(Restart, StageLengths) {
    const RestartSchedule s{4.0, 0.25, 0.25, 100.0};
    EXPECT_EQ(s.stages(), 4u);
    EXPECT_EQ(s.stage_lengths(), (std::vector<std::size_t>{36, 100, 283, 800}));
}

TEST(Restart, ScheduleValidation) {
    EXPECT_THROW((RestartSchedule{1.0, 2.0, 0.25}.validate()), InvalidArgument);
    EXPECT_THROW((RestartSchedule{4.0, 0.25, 0.75}.validate()), InvalidArgument);
    EXPECT_THROW((RestartSchedule{4.0, 0.25, 0.0}.validate()), InvalidArgument);
    EXPECT_THROW((RestartSchedule{1.0, 0.75, 0.25}.validate()), InvalidArgument);  // S = 0
}

TEST(Restart, SingleStageEqualsPlainRun) {
    const RestartSchedule s{1.0, 0.5, 0.5, 10.0};
    ASSERT_EQ(s.stage_lengths(), (std::vector<std::size_t>{20}));
    const auto X = kSynthetic.x_set();
    const auto r = restart_cb_min_max(kSynthetic, X, X, Vector{1.0}, Vector{1.0}, s);
    const auto c = cb_min_max(kSynthetic, X, X, Vector{1.0}, Vector{1.0}, 20);
    EXPECT_EQ(r.x_bar, c.x_bar);
    EXPECT_EQ(r.y_bar, c.y_bar);
}

TEST(Restart, ConcatenatedTraceAndNonInferiority) {
    const RestartSchedule s{4.0, 0.25, 0.25, 100.0};
    const auto X = kSynthetic.x_set();
    const auto r = restart_cb_min_max(kSynthetic, X, X, Vector{1.0}, Vector{1.0}, s);
    EXPECT_EQ(r.stage_ends, (std::vector<std::size_t>{36, 136, 419, 1219}));
    EXPECT_EQ(r.diagnostics.oracle_calls, 1219u);
    for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_GT(r.trace[k].iteration, r.trace[k - 1].iteration);
    EXPECT_EQ(r.trace.back().iteration, 1219u);
    EXPECT_EQ(r.trace.back().stage, 4u);
    const auto single = cb_min_max(kSynthetic, X, X, Vector{1.0}, Vector{1.0}, 1219);
    EXPECT_LE(final_gap(r), 1.5 * final_gap(single));
    // Total iterations stay within twice the last stage.
    EXPECT_LE(1219u, 2u * 800u);
}

TEST(Pdg, ZeroGradientsKeepIterates) {
    const ConstantLosses f{{0.0, 0.0}};
    const auto X = FeasibleSet::ball(1.0, 1);
    const auto out = primal_dual_gradient(f, X, FeasibleSet::simplex(2), Vector{0.5}, Vector{0.25, 0.75}, 50, 0.1,
                                          0.1, DualGeometry::entropic);
    EXPECT_EQ(out.x_bar, (Vector{0.5}));
    EXPECT_NEAR(out.y_bar[0], 0.25, 1e-15);
}

TEST(Pdg, EuclideanStepByHand) {
    // One step on F = x y from (1, 1) with eta = 0.5: x -> 0.5, y -> 1.5 -> 1.
    const Bilinear f;
    const auto box = FeasibleSet::box(1.0, 1);
    SolverOptions opt;
    opt.record_every = 1;
    std::vector<double> xs;
    opt.recorder = [&xs](const Snapshot& s, RunRecord&) { xs.push_back(s.x_last[0]); };
    primal_dual_gradient(f, box, box, Vector{1.0}, Vector{1.0}, 2, 0.5, 0.5, DualGeometry::euclidean, opt);
    EXPECT_EQ(xs, (std::vector<double>{1.0, 0.5}));
}

TEST(Pdg, Validation) {
    const auto X = kSynthetic.x_set();
    EXPECT_THROW(primal_dual_gradient(kSynthetic, X, X, Vector{0.0}, Vector{0.0}, 10, 0.0, 1.0,
                                      DualGeometry::euclidean),
                 InvalidArgument);
    EXPECT_THROW(primal_dual_gradient(kSynthetic, X, X, Vector{0.0}, Vector{0.0}, 10, 1.0, 1.0,
                                      DualGeometry::entropic),
                 InvalidArgument);
}

TEST(Pdg, DroStepRule) {
    const DroProblem p(generate_dataset(200, 20, 42), {});
    const DroSteps s = pdg_dro_steps(p, 1000);
    EXPECT_DOUBLE_EQ(s.eta_w, 2e5 / (p.bound_x() * std::sqrt(1000.0)));
    EXPECT_DOUBLE_EQ(s.eta_p, std::log(200.0) / (p.bound_y() * std::sqrt(1000.0)));
}
