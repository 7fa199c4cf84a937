#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ifr/hazard.hpp"

namespace ifr {

/// Extremal families. fstar: truncated exponentials with mean one. gt1: the single truncated
/// exponential matching mean and second moment. g1: delayed truncated exponentials. g2:
/// two-rate exponentials with the rate change at T. exp1 / dirac1: the endpoint laws.
enum class FamilyTag { fstar, gt1, g1, g2, exp1, dirac1 };

[[nodiscard]] std::string_view to_string(FamilyTag tag) noexcept;

struct NamedValue {
    std::string name;
    double value;
};

/// A family member in normalized units (mean one), with its moment residuals.
struct CalibratedMember {
    FamilyTag tag = FamilyTag::dirac1;
    std::vector<NamedValue> parameters;
    PiecewiseLinearHazard distribution = PiecewiseLinearHazard::dirac(1.0);
    /// Realized minus target moment, e.g. "mean" and "second_moment".
    std::vector<NamedValue> residuals;

    /// Throws InvalidArgument when the parameter is absent.
    [[nodiscard]] double parameter(std::string_view name) const;
    /// Throws InvalidArgument when the residual is absent.
    [[nodiscard]] double residual(std::string_view name) const;
    [[nodiscard]] double max_abs_residual() const noexcept;
};

/// Moment information about X: the mean, optionally E[X^2], or E[X^r] for a chosen r.
struct MomentConstraint {
    double mean = 1.0;
    std::optional<double> second_moment;
    std::optional<double> moment_order;
    std::optional<double> moment_value;

    [[nodiscard]] static MomentConstraint mean_only(double mean = 1.0);
    [[nodiscard]] static MomentConstraint mean_variance(double mean, double second_moment);
    [[nodiscard]] static MomentConstraint rth_moment(double r, double value);

    /// Checks positivity and that at most one higher-moment constraint is set.
    void validate() const;
    /// E[X^2] / mean^2, the second moment after rescaling to mean one.
    [[nodiscard]] std::optional<double> normalized_second_moment() const;
};

/// Where a normalized second moment sits relative to the feasible range [1, 2].
enum class Degeneracy { none, dirac, exponential };

/// Tolerance within which a normalized second moment is snapped to an endpoint of [1, 2].
inline constexpr double kEndpointTolerance = 1e-9;

/// Throws Infeasible outside [1, 2] beyond kEndpointTolerance.
[[nodiscard]] Degeneracy classify_second_moment(double mu2);

/// Solves e^{-w t} = 1 - w for w in [0, 1], given t >= 1 (t = 1 gives 0, t = inf gives 1).
[[nodiscard]] double solve_w_for_t(double t);

/// Mean-one truncated exponential with rate w, truncated at t_w = -ln(1 - w) / w.
/// w = 0 is the point mass at 1 and w = 1 is Exp(1).
[[nodiscard]] CalibratedMember fstar_member(double w);

[[nodiscard]] CalibratedMember exp1_member();
[[nodiscard]] CalibratedMember dirac1_member();

/// Truncated exponential with mean 1 and second moment mu2, 1 < mu2 < 2.
/// Parameters: a (rate), T1 (truncation point), s = a * T1.
[[nodiscard]] CalibratedMember calibrate_gt1(double mu2);

/// Delayed truncated exponential: S(x) = 1 on [0, delta), e^{-k (x - delta)} on [delta, T),
/// atom at T. Requires T >= T1(mu2); T = +inf gives the shifted exponential.
[[nodiscard]] CalibratedMember calibrate_g1(double T, double mu2);

/// Two-rate exponential: rate k1 on [0, T), rate k2 >= k1 beyond. Requires 1 - sigma <= T < T1.
[[nodiscard]] CalibratedMember calibrate_g2(double T, double mu2);

/// Lower end 1 - sqrt(mu2 - 1) of the g2 parameter range.
[[nodiscard]] double g2_lower_endpoint(double mu2);

/// Calibrated members on fixed grids for one normalized second moment, reused by the sweeps.
/// g1 is parameterized by u = T1 / T in [0, 1] (u = 0 is T = inf), g2 by T in [T0, T1].
class MeanVarianceFamilies {
public:
    explicit MeanVarianceFamilies(double mu2, std::size_t grid_points = 256);

    [[nodiscard]] double mu2() const noexcept { return mu2_; }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }
    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double t1() const noexcept { return gt1_.parameter("T1"); }
    [[nodiscard]] std::size_t grid_points() const noexcept { return grid_points_; }
    [[nodiscard]] const CalibratedMember& gt1() const noexcept { return gt1_; }

    /// Member of g1 at compactified parameter u; u = 1 returns gt1.
    [[nodiscard]] CalibratedMember g1_at(double u) const;
    /// Member of g2 at T; T = T1 returns gt1.
    [[nodiscard]] CalibratedMember g2_at(double T) const;

    [[nodiscard]] double g1_grid_parameter(std::size_t i) const;
    [[nodiscard]] double g2_grid_parameter(std::size_t i) const;
    [[nodiscard]] const std::vector<CalibratedMember>& g1_grid() const noexcept { return g1_grid_; }
    [[nodiscard]] const std::vector<CalibratedMember>& g2_grid() const noexcept { return g2_grid_; }

private:
    double mu2_;
    double sigma_;
    double t0_;
    CalibratedMember gt1_;
    std::size_t grid_points_;
    std::vector<CalibratedMember> g1_grid_;
    std::vector<CalibratedMember> g2_grid_;
};

}  // namespace ifr
