#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>

#include "ifr/distortion.hpp"
#include "ifr/families.hpp"
#include "ifr/hazard.hpp"
#include "ifr/risk_spec.hpp"
#include "ifr/types.hpp"

namespace ifr {

struct SolverTrace {
    std::size_t grid_points = 0;
    std::uintmax_t iterations = 0;
    double bracket_width = 0.0;
};

/// A sharp bound over IFR distributions with the given moments, and a distribution attaining
/// it. The member lives in normalized units; attaining_distribution() rescales it.
struct BoundResult {
    Direction direction = Direction::sup;
    double value = 0.0;
    CalibratedMember member;
    double scale = 1.0;
    SolverTrace trace;
    /// Estimated absolute error of `value`.
    double tolerance = 0.0;

    [[nodiscard]] PiecewiseLinearHazard attaining_distribution() const;
};

struct BoundPair {
    BoundResult inf;
    BoundResult sup;
};

/// Bounds on the left quantile VaR and on the right quantile VaR+.
struct VarBounds {
    BoundResult inf_var;
    BoundResult sup_var;
    BoundResult inf_var_plus;
    BoundResult sup_var_plus;
};

struct SearchOptions {
    /// Grid nodes per family in the sweeps.
    std::size_t grid_points = 256;
    /// Abscissa tolerance of the refinement step.
    double refine_tol = 1e-10;
};

/// Upper envelope of IFR survival functions with mean one: 1 up to 1, then 1 - w(t).
[[nodiscard]] double upper_survival_bound(double t);
/// Lower envelope: e^{-t} below 1, 0 from 1 on.
[[nodiscard]] double lower_survival_bound(double t);

// Mean (or r-th moment) only.

/// VaR bounds at level alpha in (0, 1) given the mean, or given E[X^r] alone when the
/// constraint carries an r-th moment. Left and right quantile bounds coincide here.
[[nodiscard]] VarBounds var_bounds_mean(double alpha,
                                        const MomentConstraint& c = MomentConstraint{});
[[nodiscard]] BoundResult sup_var_mean(double alpha,
                                       const MomentConstraint& c = MomentConstraint{});
/// Requires r >= 1 for an r-th moment constraint.
[[nodiscard]] BoundResult inf_var_mean(double alpha,
                                       const MomentConstraint& c = MomentConstraint{});

/// Bounds of rho_h for a concave distortion: [mean, mean * rho_h(Exp(1))].
[[nodiscard]] BoundPair coherent_bounds_mean(const Distortion& h, double mean = 1.0);

[[nodiscard]] BoundResult sup_rvar_mean(double alpha, double beta, double mean = 1.0,
                                        const SearchOptions& opts = {});
[[nodiscard]] BoundResult inf_rvar_mean(double alpha, double beta, double mean = 1.0);

/// Stop-loss premium bounds: sup attained by the exponential, inf by the point mass.
[[nodiscard]] BoundPair stoploss_bounds_mean(double retention, double mean = 1.0);
/// The same supremum obtained by maximizing (1 - a)(sup TVaR_a - t) over a.
[[nodiscard]] BoundResult sup_stoploss_via_tvar_mean(double retention, double mean = 1.0,
                                                     const SearchOptions& opts = {});
[[nodiscard]] BoundPair limited_loss_bounds_mean(double retention, double mean = 1.0);

// Mean and second moment. The constraint must carry a second moment; normalized values
// within 1e-9 of 1 or 2 collapse to the point mass or the exponential.

[[nodiscard]] VarBounds var_bounds_meanvar(double alpha, const MomentConstraint& c,
                                           const SearchOptions& opts = {});
[[nodiscard]] BoundResult sup_tvar_meanvar(double alpha, const MomentConstraint& c,
                                           const SearchOptions& opts = {});
[[nodiscard]] BoundResult sup_rvar_meanvar(double alpha, double beta, const MomentConstraint& c,
                                           const SearchOptions& opts = {});
[[nodiscard]] BoundResult inf_rvar_meanvar(double alpha, double beta, const MomentConstraint& c,
                                           const SearchOptions& opts = {});
[[nodiscard]] BoundPair stoploss_bounds_meanvar(double retention, const MomentConstraint& c,
                                                const SearchOptions& opts = {});
[[nodiscard]] BoundPair limited_loss_bounds_meanvar(double retention, const MomentConstraint& c,
                                                    const SearchOptions& opts = {});

// Normalized (mean one) versions on prebuilt families, for repeated evaluation.

enum class FamilySet { g1, g2, both };

/// Extremum of a functional over the chosen families: grid sweep plus refinement.
[[nodiscard]] BoundResult optimize_over_families(
    const MeanVarianceFamilies& families,
    const std::function<double(const PiecewiseLinearHazard&)>& functional, Direction dir,
    FamilySet set, const SearchOptions& opts = {});

[[nodiscard]] BoundResult sup_tvar_meanvar(double alpha, const MeanVarianceFamilies& families,
                                           const SearchOptions& opts = {});
[[nodiscard]] BoundResult sup_rvar_meanvar(double alpha, double beta,
                                           const MeanVarianceFamilies& families,
                                           const SearchOptions& opts = {});
[[nodiscard]] BoundResult inf_rvar_meanvar(double alpha, double beta,
                                           const MeanVarianceFamilies& families,
                                           const SearchOptions& opts = {});

/// Shared, immutable families for a normalized second moment, built on first use.
[[nodiscard]] std::shared_ptr<const MeanVarianceFamilies> cached_families(double mu2,
                                                                          std::size_t grid_points);

/// Dispatches a risk functional and a constraint to the matching bound.
[[nodiscard]] BoundResult bound(const RiskSpec& spec, const MomentConstraint& c, Direction dir,
                                const SearchOptions& opts = {});

}  // namespace ifr
