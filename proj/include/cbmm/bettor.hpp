#pragma once

// Constrained coin-betting learner over a Euclidean set.
//
// The unconstrained part is a Krichevsky-Trofimov bettor: after t absorbed
// gradients g_1..g_t with bets b_1..b_t,
//
//     wealth_t = eps' - sum_j <g_j, b_j>
//     b_{t+1}  = -(sum_j g_j) * wealth_t / (t + 1)
//
// and the unconstrained point is anchor + b. Constraints are handled by the
// black-box reduction: play the projection of the unconstrained point and
// feed the bettor the surrogate gradient of
//     0.5 * (<g, x> + |g| * dist(x, X)).

#include <cstdint>
#include <string>

#include "cbmm/core.hpp"

namespace cbmm {

/// Where bets are anchored.
///  - initial_point: bets are measured from x0, so the bettor starts at x0
///    and moves away from it as wealth accumulates.
///  - origin: bets are measured from 0. x0 is played on the first round only
///    and is not charged against wealth; from round 2 on the iterate is the
///    raw bet.
enum class Centering { initial_point, origin };

inline constexpr double kGradientNormSlack = 1e-9;

/// 0.5 * (ghat + |ghat| * (x_tilde - x_proj) / |x_tilde - x_proj|), with the
/// second term zero when the two points coincide. Throws ScalingViolation
/// when |ghat| exceeds 1.
inline Vector surrogate_gradient(ConstSpan ghat, ConstSpan x_tilde, ConstSpan x_proj) {
    require_same_dim(ghat, x_tilde, "surrogate_gradient");
    require_same_dim(x_tilde, x_proj, "surrogate_gradient");
    const double gnorm = norm2(ghat);
    if (gnorm > 1.0 + kGradientNormSlack) {
        throw ScalingViolation("surrogate_gradient: |g| = " + std::to_string(gnorm) + " exceeds 1", 0);
    }
    Vector out(ghat.size());
    const Vector diff = subtract(x_tilde, x_proj);
    const double dist = norm2(diff);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double pull = dist > 0.0 ? gnorm * diff[i] / dist : 0.0;
        out[i] = 0.5 * (ghat[i] + pull);
    }
    return out;
}

/// Single-owner betting state. Not thread-safe; may be moved between
/// threads between rounds.
class CoinBettor {
public:
    CoinBettor(Vector initial_point, double epsilon_prime = 1.0,
               Centering centering = Centering::initial_point)
        : initial_(std::move(initial_point)),
          anchor_(centering == Centering::initial_point ? initial_ : Vector(initial_.size(), 0.0)),
          epsilon_prime_(epsilon_prime),
          wealth_(epsilon_prime),
          grad_sum_(initial_.size(), 0.0),
          bet_(initial_.size(), 0.0),
          centering_(centering) {
        if (initial_.empty()) throw InvalidArgument("CoinBettor: empty initial point");
        require_finite(initial_, "CoinBettor");
        if (!(epsilon_prime > 0.0) || !std::isfinite(epsilon_prime)) {
            throw InvalidArgument("CoinBettor: epsilon_prime must be positive");
        }
        refresh_unconstrained();
    }

    std::size_t dimension() const noexcept { return initial_.size(); }
    std::uint64_t step() const noexcept { return step_; }
    double wealth() const noexcept { return wealth_; }
    double epsilon_prime() const noexcept { return epsilon_prime_; }
    Centering centering() const noexcept { return centering_; }
    const Vector& anchor() const noexcept { return anchor_; }
    const Vector& grad_sum() const noexcept { return grad_sum_; }
    const Vector& bet() const noexcept { return bet_; }

    /// Current unconstrained point x~_t.
    const Vector& unconstrained() const noexcept { return unconstrained_; }

    Vector play(const FeasibleSet& set) const { return set.project(unconstrained_); }

    /// Absorb one (already surrogate-transformed) gradient with |g| <= 1 and
    /// move to the next unconstrained point.
    const Vector& absorb(ConstSpan g) {
        require_same_dim(g, grad_sum_, "CoinBettor::absorb");
        const double gnorm = norm2(g);
        if (gnorm > 1.0 + kGradientNormSlack) {
            throw ScalingViolation("CoinBettor: |g| = " + std::to_string(gnorm) + " exceeds 1",
                                   static_cast<std::size_t>(step_ + 1));
        }
        const bool first_origin_round = centering_ == Centering::origin && step_ == 0;
        if (!first_origin_round) wealth_ -= dot(g, bet_);
        if (!(wealth_ > 0.0)) {
            throw WealthExhausted("CoinBettor: wealth " + std::to_string(wealth_) + " <= 0",
                                  static_cast<std::size_t>(step_ + 1));
        }
        axpy(1.0, g, grad_sum_);
        ++step_;
        const double denom = static_cast<double>(step_ + 1);
        for (std::size_t i = 0; i < bet_.size(); ++i) bet_[i] = -(grad_sum_[i] * wealth_) / denom;
        refresh_unconstrained();
        return unconstrained_;
    }

    /// Play on `set`, receive raw gradient `ghat` (|ghat| <= 1) at the played
    /// point, absorb its surrogate. Returns the played point.
    Vector round(const FeasibleSet& set, ConstSpan ghat) {
        Vector played = play(set);
        const Vector g = surrogate_gradient(ghat, unconstrained_, played);
        absorb(g);
        return played;
    }

private:
    void refresh_unconstrained() {
        if (centering_ == Centering::origin && step_ == 0) {
            unconstrained_ = initial_;
            return;
        }
        unconstrained_.resize(bet_.size());
        for (std::size_t i = 0; i < bet_.size(); ++i) unconstrained_[i] = anchor_[i] + bet_[i];
    }

    Vector initial_;
    Vector anchor_;
    double epsilon_prime_;
    double wealth_;
    Vector grad_sum_;
    Vector bet_;
    Vector unconstrained_;
    std::uint64_t step_ = 0;
    Centering centering_;
};

/// One OCO round against an oblivious gradient: returns the played point.
inline Vector oco_round(CoinBettor& bettor, const FeasibleSet& set, ConstSpan ghat) {
    return bettor.round(set, ghat);
}

inline const char* to_string(Centering c) {
    return c == Centering::origin ? "origin" : "x0";
}

}  // namespace cbmm
