#pragma once

// Saddle-point oracles. An oracle evaluates F(x, y) and returns one
// subgradient pair per query:
//     grad_x     in  d/dx F(x, y)
//     grad_neg_y in  d/dy (-F(x, y))
// together with norm bounds used to pre-scale gradients into the unit ball.
// Oracles are immutable after construction and safe for concurrent queries.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <optional>

#include "cbmm/core.hpp"
#include "cbmm/data.hpp"

namespace cbmm {

struct OracleAnswer {
    Vector grad_x;
    Vector grad_neg_y;
};

template <class O>
concept SaddleOracle = requires(const O& o, ConstSpan x, ConstSpan y) {
    { o.value(x, y) } -> std::convertible_to<double>;
    { o.subgradients(x, y) } -> std::same_as<OracleAnswer>;
    { o.bound_x() } -> std::convertible_to<double>;
    { o.bound_y() } -> std::convertible_to<double>;
};

/// F(x, y) = (rho/4) x^4 + x y - (rho/4) y^4 on [-R_x, R_x] x [-R_y, R_y].
/// Saddle point at (0, 0).
class SyntheticProblem {
public:
    SyntheticProblem(double rho = 0.5, double radius_x = 5.0, double radius_y = 5.0)
        : rho_(rho), rx_(radius_x), ry_(radius_y) {
        if (!(rho > 0.0) || !(radius_x > 0.0) || !(radius_y > 0.0)) {
            throw InvalidArgument("SyntheticProblem: rho, R_x and R_y must be positive");
        }
    }

    double rho() const noexcept { return rho_; }
    double radius_x() const noexcept { return rx_; }
    double radius_y() const noexcept { return ry_; }

    FeasibleSet x_set() const { return FeasibleSet::box(rx_, 1); }
    FeasibleSet y_set() const { return FeasibleSet::box(ry_, 1); }

    double value(double x, double y) const {
        return rho_ / 4.0 * (x * x * x * x) + x * y - rho_ / 4.0 * (y * y * y * y);
    }

    double value(ConstSpan x, ConstSpan y) const { return value(scalar(x), scalar(y)); }

    OracleAnswer subgradients(ConstSpan x, ConstSpan y) const {
        const double a = scalar(x);
        const double b = scalar(y);
        return {{rho_ * a * a * a + b}, {-(a - rho_ * b * b * b)}};
    }

    /// max over the box of |rho x^3 + y| and |x - rho y^3|.
    double bound_x() const { return rho_ * rx_ * rx_ * rx_ + ry_; }
    double bound_y() const { return rx_ + rho_ * ry_ * ry_ * ry_; }

    /// argmax_y F(x, y): the clipped cube root of x / rho.
    double best_response_y(double x) const { return std::clamp(std::cbrt(x / rho_), -ry_, ry_); }
    /// argmin_x F(x, y): the clipped cube root of -y / rho.
    double best_response_x(double y) const { return std::clamp(std::cbrt(-y / rho_), -rx_, rx_); }

    Vector optimum_x() const { return {0.0}; }
    Vector optimum_y() const { return {0.0}; }

private:
    static double scalar(ConstSpan v) {
        if (v.size() != 1) throw InvalidArgument("SyntheticProblem: expected a scalar");
        return v[0];
    }

    double rho_;
    double rx_;
    double ry_;
};

/// Regularized hinge-loss DRO:
///   F(w, p) = sum_i p_i l_i(w) + s (lambda/2) |p - 1/n|^2 + (rho/2) |w|^2
/// with l_i(w) = max(0, 1 - y_i <w, x_i>), |w| <= R, p in the simplex and
/// s = regularizer_sign in {+1, -1}.
class DroProblem {
public:
    struct Params {
        double radius = 1e5;
        double lambda = 1e-4;
        double rho = 1e-4;
        int regularizer_sign = +1;
    };

    DroProblem(Dataset data, Params params) : data_(std::move(data)), params_(params) {
        if (data_.samples.empty()) throw InvalidArgument("DroProblem: empty dataset");
        if (!is_binary(data_)) throw InvalidArgument("DroProblem: labels must be +1/-1");
        if (!(params_.radius > 0.0)) throw InvalidArgument("DroProblem: R must be positive");
        if (!(params_.lambda >= 0.0) || !(params_.rho >= 0.0)) {
            throw InvalidArgument("DroProblem: lambda and rho must be non-negative");
        }
        if (params_.regularizer_sign != 1 && params_.regularizer_sign != -1) {
            throw InvalidArgument("DroProblem: regularizer sign must be +1 or -1");
        }
        if (data_.dimension == 0) throw InvalidArgument("DroProblem: dataset has no features");
        max_feature_norm_ = 0.0;
        for (const auto& s : data_.samples) max_feature_norm_ = std::max(max_feature_norm_, s.features.norm2());
    }

    const Dataset& data() const noexcept { return data_; }
    const Params& params() const noexcept { return params_; }
    std::size_t num_samples() const noexcept { return data_.samples.size(); }
    std::size_t dimension() const noexcept { return data_.dimension; }

    FeasibleSet w_set() const { return FeasibleSet::ball(params_.radius, dimension()); }
    FeasibleSet p_set() const { return FeasibleSet::simplex(num_samples()); }
    Vector uniform() const { return Vector(num_samples(), 1.0 / static_cast<double>(num_samples())); }

    /// 1 - y_i <w, x_i> for every sample.
    Vector margins(ConstSpan w) const {
        check_w(w);
        Vector m(num_samples());
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto& s = data_.samples[i];
            m[i] = 1.0 - s.label * s.features.dot(w);
        }
        return m;
    }

    Vector losses(ConstSpan w) const {
        Vector l = margins(w);
        for (double& v : l) v = std::max(v, 0.0);
        return l;
    }

    double value(ConstSpan w, ConstSpan p) const {
        check_p(p);
        const Vector l = losses(w);
        return dot(p, l) + regularizer_p(p) + 0.5 * params_.rho * dot(w, w);
    }

    OracleAnswer subgradients(ConstSpan w, ConstSpan p) const {
        check_p(p);
        const Vector m = margins(w);
        const double n = static_cast<double>(num_samples());
        OracleAnswer out{Vector(w.begin(), w.end()), Vector(num_samples())};
        for (double& v : out.grad_x) v *= params_.rho;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto& s = data_.samples[i];
            // Kink (margin exactly 0) takes the zero branch.
            if (m[i] > 0.0) s.features.add_to(-p[i] * s.label, out.grad_x);
            const double loss = std::max(m[i], 0.0);
            out.grad_neg_y[i] = -(loss + params_.regularizer_sign * params_.lambda * (p[i] - 1.0 / n));
        }
        return out;
    }

    /// max_i |x_i| + rho R  (Euclidean bound on the w-gradient)
    double bound_x() const { return max_feature_norm_ + params_.rho * params_.radius; }
    /// max_i (1 + R |x_i|) + lambda  (infinity-norm bound on the p-gradient)
    double bound_y() const { return 1.0 + params_.radius * max_feature_norm_ + params_.lambda; }

private:
    double regularizer_p(ConstSpan p) const {
        const double u = 1.0 / static_cast<double>(num_samples());
        double s = 0.0;
        for (double v : p) s += (v - u) * (v - u);
        return params_.regularizer_sign * 0.5 * params_.lambda * s;
    }

    void check_w(ConstSpan w) const {
        if (w.size() != dimension()) throw InvalidArgument("DroProblem: w has the wrong dimension");
    }
    void check_p(ConstSpan p) const {
        if (p.size() != num_samples()) throw InvalidArgument("DroProblem: p has the wrong dimension");
    }

    Dataset data_;
    Params params_;
    double max_feature_norm_ = 0.0;
};

static_assert(SaddleOracle<SyntheticProblem>);
static_assert(SaddleOracle<DroProblem>);

}  // namespace cbmm
