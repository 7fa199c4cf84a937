#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifr/hazard.hpp"

namespace ifr {

/// Distortion function h : [0, 1] -> [0, 1], nondecreasing with h(0) = 0 and h(1) = 1.
/// The measure it induces is rho_h(X) = integral of h(S_X(x)) over [0, inf).
class Distortion {
public:
    using Function = std::function<double(double)>;

    /// `kinks` lists interior points of (0, 1) where h may fail to be smooth; integration is
    /// split there. Validates h(0) = 0, h(1) = 1 and monotonicity on a 1001-point grid.
    Distortion(std::string name, Function h, std::vector<double> kinks = {});

    [[nodiscard]] static Distortion identity();
    /// min(u / (1 - alpha), 1), which turns rho_h into TVaR at level alpha.
    [[nodiscard]] static Distortion tvar(double alpha);
    /// u^{1/c}; concave for c >= 1.
    [[nodiscard]] static Distortion proportional_hazard(double c);
    /// 1 - (1 - u)^c; concave for c >= 1.
    [[nodiscard]] static Distortion dual_power(double c);
    /// Linear interpolation through (u[i], h[i]); u must run from 0 to 1, strictly increasing.
    [[nodiscard]] static Distortion tabulated(std::vector<double> u, std::vector<double> h);

    [[nodiscard]] double operator()(double u) const { return h_(u); }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::span<const double> kinks() const noexcept { return kinks_; }

    /// Midpoint concavity test on a uniform grid with the given tolerance.
    [[nodiscard]] bool is_concave(std::size_t grid_points = 1001, double tol = 1e-12) const;

private:
    std::string name_;
    Function h_;
    std::vector<double> kinks_;
};

/// Parses "identity", "tvar:<alpha>", "proportional-hazard:<c>" or "power:<c>".
[[nodiscard]] Distortion parse_distortion(std::string_view text);

/// rho_h(X). Throws DivergentIntegral when the tail integral cannot be resolved.
[[nodiscard]] double distortion_value(const PiecewiseLinearHazard& d, const Distortion& h);

}  // namespace ifr
