#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "cbmm/core.hpp"
#include "cbmm/data.hpp"
#include "cbmm/problems.hpp"

namespace cbmm {

/// One row of a convergence trace. Optional fields are left empty when the
/// quantity does not apply to the experiment.
struct RunRecord {
    std::size_t iteration = 0;
    std::optional<double> elapsed_seconds;
    double avg_x_stat = 0.0;
    double avg_y_stat = 0.0;
    std::optional<double> gap;
    bool gap_exact = false;
    std::optional<double> dist_to_opt;       // averaged iterate
    std::optional<double> dist_to_opt_last;  // last played iterate
    std::optional<double> train_loss;
    std::optional<double> test_loss;
    std::optional<double> robust_objective;
    std::optional<double> regret_x;
    std::optional<double> regret_y;
    std::size_t stage = 0;
};

struct GapEstimate {
    double value;
    bool exact;
};

/// max_y F(x, y) - min_x F(x, y) in closed form.
inline GapEstimate duality_gap(const SyntheticProblem& prob, double x, double y) {
    const double upper = prob.value(x, prob.best_response_y(x));
    const double lower = prob.value(prob.best_response_x(y), y);
    return {upper - lower, true};
}

inline GapEstimate duality_gap(const SyntheticProblem& prob, ConstSpan x, ConstSpan y) {
    if (x.size() != 1 || y.size() != 1) throw InvalidArgument("duality_gap: synthetic problem is scalar");
    return duality_gap(prob, x[0], y[0]);
}

/// Maximizer over the simplex of F(w, .). With the +lambda sign (or
/// lambda = 0) F is convex in p and the max sits on a vertex; with the
/// -lambda sign the maximizer is the projection of 1/n + l(w)/lambda.
inline Vector dro_best_response_p(const DroProblem& prob, ConstSpan w) {
    const Vector l = prob.losses(w);
    const auto& par = prob.params();
    const std::size_t n = prob.num_samples();
    if (par.regularizer_sign < 0 && par.lambda > 0.0) {
        Vector target(n);
        for (std::size_t i = 0; i < n; ++i) target[i] = 1.0 / static_cast<double>(n) + l[i] / par.lambda;
        return project_simplex(target);
    }
    // Vertex enumeration; every vertex has the same regularizer value.
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (l[i] > l[best]) best = i;
    }
    Vector p(n, 0.0);
    p[best] = 1.0;
    return p;
}

/// max_{p in simplex} F(w, p), computed exactly.
inline double robust_objective(const DroProblem& prob, ConstSpan w) {
    const Vector p = dro_best_response_p(prob, w);
    return prob.value(w, p);
}

inline constexpr std::size_t kDroInnerSteps = 500;

/// Upper estimate of min_{|w| <= R} F(w, p): projected subgradient steps from
/// w = 0 with step 1/(rho k) (or R/(G sqrt k) when rho = 0), keeping the best
/// value seen.
inline double dro_primal_min_estimate(const DroProblem& prob, ConstSpan p, std::size_t steps = kDroInnerSteps) {
    const FeasibleSet ball = prob.w_set();
    Vector w(prob.dimension(), 0.0);
    double best = prob.value(w, p);
    const double rho = prob.params().rho;
    for (std::size_t k = 1; k <= steps; ++k) {
        const OracleAnswer g = prob.subgradients(w, p);
        const double step = rho > 0.0 ? 1.0 / (rho * static_cast<double>(k))
                                       : prob.params().radius / (prob.bound_x() * std::sqrt(static_cast<double>(k)));
        axpy(-step, g.grad_x, w);
        w = ball.project(w);
        best = std::min(best, prob.value(w, p));
    }
    return best;
}

/// Gap with exact inner max and estimated inner min; flagged inexact. The
/// value never exceeds the true gap.
inline GapEstimate duality_gap(const DroProblem& prob, ConstSpan w, ConstSpan p,
                               std::size_t inner_steps = kDroInnerSteps) {
    return {robust_objective(prob, w) - dro_primal_min_estimate(prob, p, inner_steps), false};
}

/// KL(p || q) in nats with 0 ln 0 = 0.
inline double kl(ConstSpan p, ConstSpan q) {
    require_same_dim(p, q, "kl");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) throw InfiniteDivergence("kl: q vanishes where p is positive");
        s += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(s, 0.0);
}

struct HingeLosses {
    double mean;
    Vector per_sample;
};

inline HingeLosses hinge_losses(const Dataset& ds, ConstSpan w) {
    if (ds.samples.empty()) throw EmptyDatasetError();
    if (w.size() != ds.dimension) throw InvalidArgument("hinge_losses: dimension mismatch");
    HingeLosses out{0.0, Vector(ds.size())};
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& s = ds.samples[i];
        out.per_sample[i] = std::max(0.0, 1.0 - s.label * s.features.dot(w));
    }
    out.mean = sum(out.per_sample) / static_cast<double>(ds.size());
    return out;
}

/// sum_t loss(t, played_t) - sum_t loss(t, comparator_t)
inline double regret(const std::vector<Vector>& played,
                     const std::function<double(std::size_t, ConstSpan)>& loss,
                     const std::function<Vector(std::size_t)>& comparator) {
    double s = 0.0;
    for (std::size_t t = 0; t < played.size(); ++t) s += loss(t, played[t]) - loss(t, comparator(t));
    return s;
}

/// Regret of played points under linear losses <g_t, .> against a fixed u.
inline double linear_regret(const std::vector<Vector>& gradients, const std::vector<Vector>& played, ConstSpan u) {
    if (gradients.size() != played.size()) throw InvalidArgument("linear_regret: length mismatch");
    double s = 0.0;
    for (std::size_t t = 0; t < played.size(); ++t) s += dot(gradients[t], played[t]) - dot(gradients[t], u);
    return s;
}

}  // namespace cbmm
