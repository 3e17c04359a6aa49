#pragma once

// Min-max drivers. Every solver queries its oracle exactly once per
// iteration so iteration counts are comparable across algorithms.
//
//   cb_min_max          two coin bettors (x and y), Euclidean geometry
//   cb_min_max_simplex  coin bettor on x, simplex bettor on p
//   restart_cb_min_max  cb_min_max stages with geometrically shrinking targets
//   primal_dual_gradient  projected (or exponentiated) gradient baseline

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cbmm/bettor.hpp"
#include "cbmm/core.hpp"
#include "cbmm/metrics.hpp"
#include "cbmm/problems.hpp"
#include "cbmm/simplex_bettor.hpp"

namespace cbmm {

/// Read-only view of solver progress handed to the recorder.
struct Snapshot {
    std::size_t iteration;  // 1-based, rounds completed
    ConstSpan x_bar;
    ConstSpan y_bar;
    ConstSpan x_last;
    ConstSpan y_last;
};

/// Fills problem-specific fields of a trace row.
using Recorder = std::function<void(const Snapshot&, RunRecord&)>;

struct SolverOptions {
    double epsilon_prime = 1.0;
    Centering centering = Centering::origin;
    CoinSign coin_sign = CoinSign::regret;
    /// 0 selects max(1, T / 1000).
    std::size_t record_every = 0;
    bool record_time = false;
    Recorder recorder;
};

/// Invariant monitoring collected during a run.
struct SolverDiagnostics {
    std::size_t oracle_calls = 0;
    std::size_t feasibility_violations = 0;  // played point farther than 1e-12 from its set
    double max_scaled_grad_x = 0.0;
    double max_scaled_grad_y = 0.0;
    double min_wealth_x = std::numeric_limits<double>::infinity();
    double min_wealth_y = std::numeric_limits<double>::infinity();

    void merge(const SolverDiagnostics& o) {
        oracle_calls += o.oracle_calls;
        feasibility_violations += o.feasibility_violations;
        max_scaled_grad_x = std::max(max_scaled_grad_x, o.max_scaled_grad_x);
        max_scaled_grad_y = std::max(max_scaled_grad_y, o.max_scaled_grad_y);
        min_wealth_x = std::min(min_wealth_x, o.min_wealth_x);
        min_wealth_y = std::min(min_wealth_y, o.min_wealth_y);
    }
};

struct SolverOutput {
    Vector x_bar;
    Vector y_bar;
    std::vector<RunRecord> trace;
    SolverDiagnostics diagnostics;
    /// Cumulative iteration count at the end of each stage (one entry for
    /// single-stage solvers).
    std::vector<std::size_t> stage_ends;
};

namespace detail {

inline std::size_t record_stride(std::size_t requested, std::size_t T) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, T / 1000);
}

/// Running sums and trace bookkeeping shared by all drivers.
class Tracker {
public:
    Tracker(std::size_t dim_x, std::size_t dim_y, std::size_t T, const SolverOptions& opt)
        : sum_x_(dim_x, 0.0), sum_y_(dim_y, 0.0), T_(T), stride_(record_stride(opt.record_every, T)),
          opt_(opt), start_(std::chrono::steady_clock::now()) {}

    void add(std::size_t t, ConstSpan x, ConstSpan y) {
        axpy(1.0, x, sum_x_);
        axpy(1.0, y, sum_y_);
        if (t % stride_ == 0 || t == T_) record(t, x, y);
    }

    Vector x_bar() const { return scaled(sum_x_, 1.0 / static_cast<double>(T_)); }
    Vector y_bar() const { return scaled(sum_y_, 1.0 / static_cast<double>(T_)); }
    std::vector<RunRecord> take_trace() { return std::move(trace_); }

private:
    void record(std::size_t t, ConstSpan x, ConstSpan y) {
        const double inv = 1.0 / static_cast<double>(t);
        const Vector xb = scaled(sum_x_, inv);
        const Vector yb = scaled(sum_y_, inv);
        RunRecord r;
        r.iteration = t;
        r.avg_x_stat = xb.size() == 1 ? xb[0] : norm2(xb);
        r.avg_y_stat = yb.size() == 1 ? yb[0] : norm2(yb);
        if (opt_.recorder) opt_.recorder(Snapshot{t, xb, yb, x, y}, r);
        if (opt_.record_time) {
            r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        }
        trace_.push_back(r);
    }

    Vector sum_x_;
    Vector sum_y_;
    std::size_t T_;
    std::size_t stride_;
    const SolverOptions& opt_;
    std::chrono::steady_clock::time_point start_;
    std::vector<RunRecord> trace_;
};

inline Vector scale_checked(ConstSpan g, double bound, bool inf_norm, std::size_t t, const char* side,
                            double& max_seen) {
    Vector s = scaled(g, 1.0 / bound);
    const double nrm = inf_norm ? norm_inf(s) : norm2(s);
    max_seen = std::max(max_seen, nrm);
    if (nrm > 1.0 + kGradientNormSlack) {
        throw ScalingViolation(std::string("scaled ") + side + "-gradient norm " + std::to_string(nrm) +
                                   " exceeds 1 at iteration " + std::to_string(t),
                               t);
    }
    return s;
}

inline void require_start(const FeasibleSet& set, ConstSpan point, const char* name) {
    if (point.size() != set.dimension() || !set.contains(point, 1e-12)) {
        throw InvalidArgument(std::string(name) + " is not in its feasible set");
    }
}

inline void require_bounds(double gx, double gy) {
    if (!(gx > 0.0) || !(gy > 0.0) || !std::isfinite(gx) || !std::isfinite(gy)) {
        throw InvalidArgument("oracle gradient bounds must be positive and finite");
    }
}

}  // namespace detail

template <SaddleOracle Oracle>
SolverOutput cb_min_max(const Oracle& oracle, const FeasibleSet& X, const FeasibleSet& Y, ConstSpan x0,
                        ConstSpan y0, std::size_t T, const SolverOptions& opt = {}) {
    if (T == 0) throw InvalidArgument("cb_min_max: T must be >= 1");
    detail::require_start(X, x0, "x0");
    detail::require_start(Y, y0, "y0");
    const double gx_bound = oracle.bound_x();
    const double gy_bound = oracle.bound_y();
    detail::require_bounds(gx_bound, gy_bound);

    CoinBettor bx(Vector(x0.begin(), x0.end()), opt.epsilon_prime, opt.centering);
    CoinBettor by(Vector(y0.begin(), y0.end()), opt.epsilon_prime, opt.centering);
    detail::Tracker tracker(X.dimension(), Y.dimension(), T, opt);
    SolverDiagnostics diag;

    for (std::size_t t = 1; t <= T; ++t) {
        const Vector x = bx.play(X);
        const Vector y = by.play(Y);
        if (!X.contains(x) || !Y.contains(y)) ++diag.feasibility_violations;
        const OracleAnswer g = oracle.subgradients(x, y);
        ++diag.oracle_calls;
        const Vector gx = detail::scale_checked(g.grad_x, gx_bound, false, t, "x", diag.max_scaled_grad_x);
        const Vector gy = detail::scale_checked(g.grad_neg_y, gy_bound, false, t, "y", diag.max_scaled_grad_y);
        try {
            bx.absorb(surrogate_gradient(gx, bx.unconstrained(), x));
            by.absorb(surrogate_gradient(gy, by.unconstrained(), y));
        } catch (const NumericalError& e) {
            if (e.iteration() == t) throw;
            throw WealthExhausted(std::string(e.what()) + " at iteration " + std::to_string(t), t);
        }
        diag.min_wealth_x = std::min(diag.min_wealth_x, bx.wealth());
        diag.min_wealth_y = std::min(diag.min_wealth_y, by.wealth());
        tracker.add(t, x, y);
    }
    return {tracker.x_bar(), tracker.y_bar(), tracker.take_trace(), diag, {T}};
}

template <SaddleOracle Oracle>
SolverOutput cb_min_max_simplex(const Oracle& oracle, const FeasibleSet& X, ConstSpan x0, ConstSpan p0,
                                std::size_t T, const SolverOptions& opt = {}) {
    if (T == 0) throw InvalidArgument("cb_min_max_simplex: T must be >= 1");
    detail::require_start(X, x0, "x0");
    for (double v : p0) {
        if (!(v > 0.0)) throw InvalidArgument("p0 must lie in the open simplex");
    }
    if (p0.empty() || std::abs(sum(p0) - 1.0) > 1e-12) throw InvalidArgument("p0 must lie in the open simplex");
    const double gx_bound = oracle.bound_x();
    const double gp_bound = oracle.bound_y();
    detail::require_bounds(gx_bound, gp_bound);

    const FeasibleSet P = FeasibleSet::simplex(p0.size());
    CoinBettor bx(Vector(x0.begin(), x0.end()), opt.epsilon_prime, opt.centering);
    SimplexBettor bp(Vector(p0.begin(), p0.end()), opt.coin_sign);
    detail::Tracker tracker(X.dimension(), p0.size(), T, opt);
    SolverDiagnostics diag;

    for (std::size_t t = 1; t <= T; ++t) {
        const Vector x = bx.play(X);
        const Vector p = bp.play();
        if (!X.contains(x) || !P.contains(p)) ++diag.feasibility_violations;
        const OracleAnswer g = oracle.subgradients(x, p);
        ++diag.oracle_calls;
        const Vector gx = detail::scale_checked(g.grad_x, gx_bound, false, t, "x", diag.max_scaled_grad_x);
        const Vector gp = detail::scale_checked(g.grad_neg_y, gp_bound, true, t, "p", diag.max_scaled_grad_y);
        try {
            bx.absorb(surrogate_gradient(gx, bx.unconstrained(), x));
            bp.absorb(gp);
        } catch (const NumericalError& e) {
            if (e.iteration() == t) throw;
            throw WealthExhausted(std::string(e.what()) + " at iteration " + std::to_string(t), t);
        }
        diag.min_wealth_x = std::min(diag.min_wealth_x, bx.wealth());
        for (std::size_t i = 0; i < bp.dimension(); ++i) {
            diag.min_wealth_y = std::min(diag.min_wealth_y, bp.coordinate_wealth(i));
        }
        tracker.add(t, x, p);
    }
    return {tracker.x_bar(), tracker.y_bar(), tracker.take_trace(), diag, {T}};
}

/// Stage targets eps_s = eps0 / 2^s for s = 1..S with S = floor(log2(eps0 /
/// eps)); stage s runs ceil(C / eps_s^(2 - 2 theta)) iterations.
struct RestartSchedule {
    double epsilon0;
    double epsilon;
    double theta;
    double complexity_constant = 100.0;

    void validate() const {
        if (!(epsilon0 > 0.0) || !(epsilon > 0.0) || !(epsilon < epsilon0)) {
            throw InvalidArgument("RestartSchedule: need 0 < epsilon < epsilon0");
        }
        if (!(theta > 0.0 && theta <= 0.5)) throw InvalidArgument("RestartSchedule: theta must be in (0, 1/2]");
        if (!(complexity_constant > 0.0)) throw InvalidArgument("RestartSchedule: C must be positive");
        if (stages() < 1) throw InvalidArgument("RestartSchedule: floor(log2(epsilon0/epsilon)) must be >= 1");
    }

    std::size_t stages() const {
        const double s = std::floor(std::log2(epsilon0 / epsilon));
        return s < 1.0 ? 0 : static_cast<std::size_t>(s);
    }

    double stage_target(std::size_t s) const { return epsilon0 / std::ldexp(1.0, static_cast<int>(s)); }

    std::vector<std::size_t> stage_lengths() const {
        validate();
        std::vector<std::size_t> out;
        for (std::size_t s = 1; s <= stages(); ++s) {
            const double len = std::ceil(complexity_constant / std::pow(stage_target(s), 2.0 - 2.0 * theta));
            out.push_back(static_cast<std::size_t>(len));
        }
        return out;
    }
};

template <SaddleOracle Oracle>
SolverOutput restart_cb_min_max(const Oracle& oracle, const FeasibleSet& X, const FeasibleSet& Y, ConstSpan x0,
                                ConstSpan y0, const RestartSchedule& schedule, const SolverOptions& opt = {}) {
    const std::vector<std::size_t> lengths = schedule.stage_lengths();
    detail::require_start(X, x0, "x0");
    detail::require_start(Y, y0, "y0");
    SolverOutput out;
    Vector x(x0.begin(), x0.end());
    Vector y(y0.begin(), y0.end());
    std::size_t offset = 0;
    for (std::size_t s = 0; s < lengths.size(); ++s) {
        // Warm start from the previous stage's averages.
        SolverOutput stage = cb_min_max(oracle, X, Y, X.project(x), Y.project(y), lengths[s], opt);
        for (auto& r : stage.trace) {
            r.iteration += offset;
            r.stage = s + 1;
            out.trace.push_back(r);
        }
        offset += lengths[s];
        out.stage_ends.push_back(offset);
        out.diagnostics.merge(stage.diagnostics);
        x = std::move(stage.x_bar);
        y = std::move(stage.y_bar);
    }
    out.x_bar = std::move(x);
    out.y_bar = std::move(y);
    return out;
}

enum class DualGeometry { euclidean, entropic };

/// Projected gradient descent on x and ascent on y (or exponentiated
/// gradient ascent on a simplex y). Averages the played iterates.
template <SaddleOracle Oracle>
SolverOutput primal_dual_gradient(const Oracle& oracle, const FeasibleSet& X, const FeasibleSet& Y, ConstSpan x0,
                                  ConstSpan y0, std::size_t T, double eta_x, double eta_y, DualGeometry geometry,
                                  const SolverOptions& opt = {}) {
    if (T == 0) throw InvalidArgument("primal_dual_gradient: T must be >= 1");
    if (!(eta_x > 0.0) || !(eta_y > 0.0)) throw InvalidArgument("primal_dual_gradient: step sizes must be positive");
    if (geometry == DualGeometry::entropic && !Y.is_simplex()) {
        throw InvalidArgument("primal_dual_gradient: entropic geometry needs a simplex dual set");
    }
    detail::require_start(X, x0, "x0");
    detail::require_start(Y, y0, "y0");
    if (geometry == DualGeometry::entropic) {
        for (double v : y0) {
            if (!(v > 0.0)) throw InvalidArgument("primal_dual_gradient: entropic start must be strictly positive");
        }
    }

    Vector x(x0.begin(), x0.end());
    Vector y(y0.begin(), y0.end());
    detail::Tracker tracker(X.dimension(), Y.dimension(), T, opt);
    SolverDiagnostics diag;
    for (std::size_t t = 1; t <= T; ++t) {
        if (!X.contains(x) || !Y.contains(y)) ++diag.feasibility_violations;
        const OracleAnswer g = oracle.subgradients(x, y);
        ++diag.oracle_calls;
        tracker.add(t, x, y);

        axpy(-eta_x, g.grad_x, x);
        x = X.project(x);
        if (geometry == DualGeometry::euclidean) {
            axpy(-eta_y, g.grad_neg_y, y);
            y = Y.project(y);
        } else {
            const double shift = *std::min_element(g.grad_neg_y.begin(), g.grad_neg_y.end());
            for (std::size_t i = 0; i < y.size(); ++i) y[i] *= std::exp(-eta_y * (g.grad_neg_y[i] - shift));
            const double mass = sum(y);
            for (double& v : y) v /= mass;
        }
    }
    return {tracker.x_bar(), tracker.y_bar(), tracker.take_trace(), diag, {T}};
}

/// D / (G sqrt(T))
inline double pdg_default_step(double diameter, double grad_bound, std::size_t T) {
    return diameter / (grad_bound * std::sqrt(static_cast<double>(T)));
}

struct DroSteps {
    double eta_w;
    double eta_p;
};

/// 2R / (G_w sqrt T) and ln(n) / (G_p sqrt T)
inline DroSteps pdg_dro_steps(double radius, std::size_t n, double grad_bound_w, double grad_bound_p,
                              std::size_t T) {
    const double root = std::sqrt(static_cast<double>(T));
    double eta_p = std::log(static_cast<double>(n)) / (grad_bound_p * root);
    if (!(eta_p > 0.0)) eta_p = 1.0 / (grad_bound_p * root);  // n = 1: the dual step is irrelevant
    return {2.0 * radius / (grad_bound_w * root), eta_p};
}

inline DroSteps pdg_dro_steps(const DroProblem& prob, std::size_t T) {
    return pdg_dro_steps(prob.params().radius, prob.num_samples(), prob.bound_x(), prob.bound_y(), T);
}

}  // namespace cbmm
