#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ifr/types.hpp"

namespace ifr {

/// Nonnegative random variable with piecewise-constant hazard rate, hence piecewise-linear
/// cumulative hazard Lambda. On [knots[i], knots[i+1]) the hazard rate is rates[i]; the last
/// rate runs up to the terminal point, or to infinity when there is none. A terminal point d
/// puts an atom of mass S(d-) at d.
///
/// The distribution is IFR exactly when the rates are nondecreasing (see is_ifr); the class
/// itself accepts any nonnegative rates so that non-IFR inputs can be represented and rejected.
class PiecewiseLinearHazard {
public:
    /// Requires knots[0] == 0, strictly increasing finite knots, rates.size() == knots.size(),
    /// finite nonnegative rates, and terminal > knots.back(). Without a terminal, the last rate
    /// must be positive so that the survival function vanishes at infinity.
    PiecewiseLinearHazard(std::vector<double> knots, std::vector<double> rates,
                          std::optional<double> terminal = std::nullopt);

    /// Exponential distribution with the given rate.
    [[nodiscard]] static PiecewiseLinearHazard exponential(double rate = 1.0);
    /// Point mass at `at` (> 0).
    [[nodiscard]] static PiecewiseLinearHazard dirac(double at = 1.0);
    /// Exponential with the given rate, with its mass beyond `terminal` moved onto `terminal`.
    [[nodiscard]] static PiecewiseLinearHazard truncated_exponential(double rate, double terminal);

    [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
    [[nodiscard]] std::span<const double> rates() const noexcept { return rates_; }
    [[nodiscard]] std::optional<double> terminal() const noexcept { return terminal_; }
    [[nodiscard]] std::size_t segment_count() const noexcept { return knots_.size(); }

    /// Right end of segment i: the next knot, the terminal point, or +inf.
    [[nodiscard]] double segment_end(std::size_t i) const noexcept;
    /// Lambda(knots[i]).
    [[nodiscard]] double hazard_at_knot(std::size_t i) const noexcept { return hazard_at_knot_[i]; }
    /// Lambda(segment_end(i)-), +inf for an unbounded segment with positive rate.
    [[nodiscard]] double hazard_at_segment_end(std::size_t i) const noexcept;

    /// Lambda(x) for x below the terminal point, +inf from the terminal point on. Zero for x < 0.
    [[nodiscard]] double cumulative_hazard(double x) const;
    /// Lambda(x-); differs from cumulative_hazard only at the terminal point.
    [[nodiscard]] double cumulative_hazard_left(double x) const;

    friend bool operator==(const PiecewiseLinearHazard&, const PiecewiseLinearHazard&) = default;

private:
    [[nodiscard]] std::size_t segment_of(double x) const noexcept;

    std::vector<double> knots_;
    std::vector<double> rates_;
    std::optional<double> terminal_;
    std::vector<double> hazard_at_knot_;
};

/// P(X > x).
[[nodiscard]] double survival(const PiecewiseLinearHazard& d, double x);
/// P(X >= x).
[[nodiscard]] double survival_left(const PiecewiseLinearHazard& d, double x);

/// Generalized inverse of Lambda at level v >= 0: the smallest x with Lambda(x) >= v (left),
/// or the largest x with Lambda(x-) <= v (right). Capped at the terminal point; +inf when the
/// level is never reached.
[[nodiscard]] double inverse_cumulative_hazard(const PiecewiseLinearHazard& d, double level,
                                               Side side);

/// Left quantile inf{x : F(x) >= p} or right quantile sup{x : F(x-) <= p}.
/// p = 0 gives the essential infimum and p = 1 the essential supremum on both sides.
[[nodiscard]] double quantile(const PiecewiseLinearHazard& d, double p, Side side = Side::left);

/// Value-at-Risk, the quantile at level alpha.
[[nodiscard]] inline double var(const PiecewiseLinearHazard& d, double alpha,
                                Side side = Side::left) {
    return quantile(d, alpha, side);
}

[[nodiscard]] double essential_infimum(const PiecewiseLinearHazard& d);
/// Terminal point, or +inf.
[[nodiscard]] double essential_supremum(const PiecewiseLinearHazard& d);

/// E[X^r] for r > 0. Closed form for r = 1 and r = 2, adaptive quadrature otherwise.
/// Throws DivergentIntegral when the support is unbounded with a vanishing final rate.
[[nodiscard]] double moment(const PiecewiseLinearHazard& d, double r);
[[nodiscard]] inline double mean(const PiecewiseLinearHazard& d) { return moment(d, 1.0); }

/// Range Value-at-Risk: average of the quantile over [alpha, beta], 0 <= alpha < beta <= 1.
[[nodiscard]] double rvar(const PiecewiseLinearHazard& d, double alpha, double beta);
/// Tail Value-at-Risk: rvar over [alpha, 1]; alpha = 1 gives the essential supremum.
[[nodiscard]] double tvar(const PiecewiseLinearHazard& d, double alpha);

/// E[(X - t)_+] for t >= 0.
[[nodiscard]] double stop_loss(const PiecewiseLinearHazard& d, double t);
/// E[min(X, t)] for t >= 0.
[[nodiscard]] double limited_loss(const PiecewiseLinearHazard& d, double t);

/// Normalized total-time-on-test transform: (1/mean) * integral of S over [0, F^{-1}(u)].
[[nodiscard]] double ttt(const PiecewiseLinearHazard& d, double u);

/// Nondecreasing hazard rates.
[[nodiscard]] bool is_ifr(const PiecewiseLinearHazard& d) noexcept;

/// Law of c * X for c > 0.
[[nodiscard]] PiecewiseLinearHazard scale(const PiecewiseLinearHazard& d, double c);

}  // namespace ifr
