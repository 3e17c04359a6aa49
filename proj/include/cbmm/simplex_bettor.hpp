#pragma once

// Coin-betting learner over the probability simplex (one KT coin per
// coordinate, mixed through a prior).
//
// Round t (1-based):
//     w_{t,i} = (sum_{j<t} c_{j,i}) / t * (1 + sum_{j<t} c_{j,i} w_{j,i})
//     p_t     = normalize(p0 .* max(w_t, 0))   or p0 when that is all zero
// after which the loss gradient g_t arrives and coordinate i receives coin
//     c_{t,i} = m_{t,i}             if w_{t,i} > 0
//               max(m_{t,i}, 0)     otherwise
// with m_{t,i} = <g_t, p_t> - g_{t,i} (regret convention) or its negation
// (literal convention). Coins are clipped to [-1, 1] before entering the
// wealth recurrence; with |g|_inf <= 1 the unclipped value can reach 2.

#include <cstdint>
#include <string>

#include "cbmm/bettor.hpp"
#include "cbmm/core.hpp"

namespace cbmm {

enum class CoinSign { regret, literal };

inline const char* to_string(CoinSign s) { return s == CoinSign::regret ? "regret" : "literal"; }

inline constexpr double kZeroMassThreshold = 1e-300;

/// Truncated, clipped coins for one round.
inline Vector simplex_coins(ConstSpan ghat, ConstSpan p, ConstSpan w, CoinSign sign) {
    require_same_dim(ghat, p, "simplex_coins");
    require_same_dim(p, w, "simplex_coins");
    const double avg = dot(ghat, p);
    Vector c(ghat.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        double m = sign == CoinSign::regret ? avg - ghat[i] : ghat[i] - avg;
        if (!(w[i] > 0.0)) m = std::max(m, 0.0);
        c[i] = std::clamp(m, -1.0, 1.0);
    }
    return c;
}

class SimplexBettor {
public:
    explicit SimplexBettor(Vector prior, CoinSign sign = CoinSign::regret)
        : prior_(std::move(prior)),
          coin_sum_(prior_.size(), 0.0),
          wealth_product_(prior_.size(), 0.0),
          sign_(sign) {
        if (prior_.empty()) throw InvalidArgument("SimplexBettor: empty prior");
        require_finite(prior_, "SimplexBettor");
        for (double v : prior_) {
            if (!(v > 0.0)) throw InvalidArgument("SimplexBettor: prior entries must be strictly positive");
        }
        if (std::abs(sum(prior_) - 1.0) > 1e-12) throw InvalidArgument("SimplexBettor: prior must sum to 1");
        refresh();
    }

    static SimplexBettor uniform(std::size_t n, CoinSign sign = CoinSign::regret) {
        if (n == 0) throw InvalidArgument("SimplexBettor: n must be >= 1");
        return SimplexBettor(Vector(n, 1.0 / static_cast<double>(n)), sign);
    }

    std::size_t dimension() const noexcept { return prior_.size(); }
    std::uint64_t step() const noexcept { return step_; }
    CoinSign coin_sign() const noexcept { return sign_; }
    const Vector& prior() const noexcept { return prior_; }
    const Vector& coin_sum() const noexcept { return coin_sum_; }
    const Vector& wealth_product() const noexcept { return wealth_product_; }

    /// Betting fractions w_t for the current round.
    const Vector& fractions() const noexcept { return current_w_; }

    /// Distribution p_t for the current round.
    const Vector& play() const noexcept { return current_p_; }

    /// 1 + sum_j c_{j,i} w_{j,i}
    double coordinate_wealth(std::size_t i) const { return 1.0 + wealth_product_.at(i); }

    /// Absorb the loss gradient for the current round (|ghat|_inf <= 1).
    void absorb(ConstSpan ghat) {
        require_same_dim(ghat, prior_, "SimplexBettor::absorb");
        const double gmax = norm_inf(ghat);
        if (gmax > 1.0 + kGradientNormSlack) {
            throw ScalingViolation("SimplexBettor: |g|_inf = " + std::to_string(gmax) + " exceeds 1",
                                   static_cast<std::size_t>(step_ + 1));
        }
        absorb_coins(simplex_coins(ghat, current_p_, current_w_, sign_));
    }

    /// Advance with precomputed coins (each in [-1, 1]).
    void absorb_coins(ConstSpan c) {
        require_same_dim(c, prior_, "SimplexBettor::absorb_coins");
        for (double v : c) {
            if (!(std::abs(v) <= 1.0)) throw InvalidArgument("SimplexBettor: coins must lie in [-1, 1]");
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            coin_sum_[i] += c[i];
            wealth_product_[i] += c[i] * current_w_[i];
            if (!(1.0 + wealth_product_[i] > 0.0)) {
                throw WealthExhausted("SimplexBettor: coordinate " + std::to_string(i) + " wealth <= 0",
                                      static_cast<std::size_t>(step_ + 1));
            }
        }
        ++step_;
        refresh();
    }

private:
    void refresh() {
        const double t = static_cast<double>(step_ + 1);
        current_w_.resize(prior_.size());
        Vector weights(prior_.size());
        for (std::size_t i = 0; i < prior_.size(); ++i) {
            current_w_[i] = coin_sum_[i] / t * (1.0 + wealth_product_[i]);
            weights[i] = prior_[i] * std::max(current_w_[i], 0.0);
        }
        const double mass = norm1(weights);
        if (mass < kZeroMassThreshold) {
            current_p_ = prior_;
            return;
        }
        for (double& v : weights) v /= mass;
        current_p_ = std::move(weights);
    }

    Vector prior_;
    Vector coin_sum_;
    Vector wealth_product_;
    Vector current_w_;
    Vector current_p_;
    std::uint64_t step_ = 0;
    CoinSign sign_;
};

}  // namespace cbmm
