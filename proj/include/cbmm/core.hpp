#pragma once

// Dense/sparse vector helpers and projection-capable feasible sets.
//
// All reductions run in ascending index order with a single accumulator so
// that results are bit-reproducible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cbmm/errors.hpp"

namespace cbmm {

using Vector = std::vector<double>;
using ConstSpan = std::span<const double>;

inline void require_same_dim(ConstSpan a, ConstSpan b, const char* where) {
    if (a.size() != b.size()) {
        throw InvalidArgument(std::string(where) + ": dimension mismatch (" +
                              std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
}

inline void require_finite(ConstSpan v, const char* where) {
    for (double x : v) {
        if (!std::isfinite(x)) throw InvalidArgument(std::string(where) + ": non-finite entry");
    }
}

inline double dot(ConstSpan a, ConstSpan b) {
    require_same_dim(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(ConstSpan v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double norm1(ConstSpan v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

inline double norm_inf(ConstSpan v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double sum(ConstSpan v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

inline double distance(ConstSpan a, ConstSpan b) {
    require_same_dim(a, b, "distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vector subtract(ConstSpan a, ConstSpan b) {
    require_same_dim(a, b, "subtract");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vector scaled(ConstSpan v, double factor) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * factor;
    return out;
}

/// y += alpha * x
inline void axpy(double alpha, ConstSpan x, std::span<double> y) {
    if (x.size() != y.size()) throw InvalidArgument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// Sparse vector with strictly increasing indices and nonzero finite values.
class SparseVector {
public:
    struct Entry {
        std::size_t index;
        double value;
        bool operator==(const Entry&) const = default;
    };

    SparseVector() = default;

    /// Validates ordering and values; throws InvalidArgument otherwise.
    explicit SparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
        for (std::size_t k = 0; k < entries_.size(); ++k) {
            if (!std::isfinite(entries_[k].value) || entries_[k].value == 0.0) {
                throw InvalidArgument("SparseVector: values must be finite and nonzero");
            }
            if (k > 0 && entries_[k].index <= entries_[k - 1].index) {
                throw InvalidArgument("SparseVector: indices must be strictly increasing");
            }
        }
    }

    static SparseVector from_dense(ConstSpan dense) {
        std::vector<Entry> e;
        for (std::size_t i = 0; i < dense.size(); ++i) {
            if (dense[i] != 0.0) e.push_back({i, dense[i]});
        }
        return SparseVector(std::move(e));
    }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// One past the largest stored index (0 when empty).
    std::size_t extent() const noexcept { return entries_.empty() ? 0 : entries_.back().index + 1; }

    double dot(ConstSpan dense) const {
        if (extent() > dense.size()) throw InvalidArgument("SparseVector::dot: dimension mismatch");
        double s = 0.0;
        for (const auto& e : entries_) s += e.value * dense[e.index];
        return s;
    }

    /// dense += alpha * this
    void add_to(double alpha, std::span<double> dense) const {
        if (extent() > dense.size()) throw InvalidArgument("SparseVector::add_to: dimension mismatch");
        for (const auto& e : entries_) dense[e.index] += alpha * e.value;
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& e : entries_) s += e.value * e.value;
        return std::sqrt(s);
    }

    bool operator==(const SparseVector&) const = default;

private:
    std::vector<Entry> entries_;
};

struct L2Ball {
    double radius;
    Vector center;
};

struct Box {
    Vector lower;
    Vector upper;
};

struct Simplex {
    std::size_t dimension;
};

/// Euclidean projection onto the probability simplex (sort-then-threshold).
/// Inputs already on the simplex (non-negative, |sum - 1| <= 1e-12) are
/// returned unchanged, which keeps the operator exactly idempotent.
inline Vector project_simplex(ConstSpan v) {
    if (v.empty()) throw InvalidArgument("project_simplex: empty vector");
    require_finite(v, "project_simplex");
    bool nonneg = std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
    if (nonneg && std::abs(sum(v) - 1.0) <= 1e-12) return Vector(v.begin(), v.end());

    Vector u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumsum += u[j];
        const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) theta = candidate;
    }
    Vector p(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) p[i] = std::max(v[i] - theta, 0.0);
    return p;
}

/// Description of a convex compact set X, Y or the simplex. Validated on
/// construction.
class FeasibleSet {
public:
    static FeasibleSet ball(double radius, Vector center) {
        if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("L2Ball: radius must be positive");
        if (center.empty()) throw InvalidArgument("L2Ball: empty center");
        require_finite(center, "L2Ball");
        return FeasibleSet(L2Ball{radius, std::move(center)});
    }

    static FeasibleSet ball(double radius, std::size_t dimension) {
        return ball(radius, Vector(dimension, 0.0));
    }

    static FeasibleSet box(Vector lower, Vector upper) {
        require_same_dim(lower, upper, "Box");
        if (lower.empty()) throw InvalidArgument("Box: empty bounds");
        require_finite(lower, "Box");
        require_finite(upper, "Box");
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (lower[i] > upper[i]) throw InvalidArgument("Box: lower > upper");
        }
        return FeasibleSet(Box{std::move(lower), std::move(upper)});
    }

    /// Symmetric box [-radius, radius]^dimension.
    static FeasibleSet box(double radius, std::size_t dimension) {
        return box(Vector(dimension, -radius), Vector(dimension, radius));
    }

    static FeasibleSet simplex(std::size_t dimension) {
        if (dimension == 0) throw InvalidArgument("Simplex: dimension must be >= 1");
        return FeasibleSet(Simplex{dimension});
    }

    std::size_t dimension() const {
        return std::visit(
            [](const auto& s) -> std::size_t {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, L2Ball>) return s.center.size();
                else if constexpr (std::is_same_v<T, Box>) return s.lower.size();
                else return s.dimension;
            },
            shape_);
    }

    bool is_simplex() const noexcept { return std::holds_alternative<Simplex>(shape_); }
    const std::variant<L2Ball, Box, Simplex>& shape() const noexcept { return shape_; }

    Vector project(ConstSpan v) const {
        if (v.size() != dimension()) {
            throw InvalidArgument("project: dimension mismatch (" + std::to_string(v.size()) + " vs " +
                                  std::to_string(dimension()) + ")");
        }
        require_finite(v, "project");
        return std::visit([&](const auto& s) { return project_onto(s, v); }, shape_);
    }

    /// Membership with absolute tolerance `tol`.
    bool contains(ConstSpan v, double tol = 1e-12) const {
        if (v.size() != dimension()) return false;
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, L2Ball>) {
                    return distance(v, s.center) <= s.radius + tol;
                } else if constexpr (std::is_same_v<T, Box>) {
                    for (std::size_t i = 0; i < v.size(); ++i) {
                        if (v[i] < s.lower[i] - tol || v[i] > s.upper[i] + tol) return false;
                    }
                    return true;
                } else {
                    for (double x : v) {
                        if (x < -tol) return false;
                    }
                    return std::abs(sum(v) - 1.0) <= tol;
                }
            },
            shape_);
    }

    /// Euclidean distance from v to the set.
    double distance_to(ConstSpan v) const { return distance(v, project(v)); }

    double diameter() const {
        return std::visit(
            [](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, L2Ball>) return 2.0 * s.radius;
                else if constexpr (std::is_same_v<T, Box>) return distance(s.upper, s.lower);
                else return s.dimension > 1 ? std::sqrt(2.0) : 0.0;
            },
            shape_);
    }

private:
    explicit FeasibleSet(std::variant<L2Ball, Box, Simplex> shape) : shape_(std::move(shape)) {}

    static Vector project_onto(const L2Ball& b, ConstSpan v) {
        Vector d = subtract(v, b.center);
        const double r = norm2(d);
        if (r <= b.radius) return Vector(v.begin(), v.end());
        // Shrink until the rounded result is inside so re-projection is a no-op.
        double factor = b.radius / r;
        Vector out(v.size());
        for (int guard = 0; guard < 64; ++guard) {
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = b.center[i] + d[i] * factor;
            if (distance(out, b.center) <= b.radius) break;
            factor = std::nextafter(factor, 0.0);
        }
        return out;
    }

    static Vector project_onto(const Box& b, ConstSpan v) {
        Vector out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i], b.lower[i], b.upper[i]);
        return out;
    }

    static Vector project_onto(const Simplex&, ConstSpan v) { return project_simplex(v); }

    std::variant<L2Ball, Box, Simplex> shape_;
};

inline Vector project(const FeasibleSet& set, ConstSpan v) { return set.project(v); }

}  // namespace cbmm
