#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifr/bounds.hpp"
#include "ifr/hazard.hpp"

namespace ifr::oracle {

/// Counter-based SplitMix64: draw k of stream `seed` depends only on (seed, k).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    [[nodiscard]] std::uint64_t bits(std::uint64_t counter) const noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] double uniform(std::uint64_t counter) const noexcept;

private:
    std::uint64_t seed_;
};

struct IfrSample {
    std::uint64_t seed;
    std::size_t n_segments;
    PiecewiseLinearHazard distribution;
    double mu2;
};

/// Segment count used by the suites for a seed: 1 + seed mod 16.
[[nodiscard]] constexpr std::size_t default_segment_count(std::uint64_t seed) noexcept {
    return 1 + static_cast<std::size_t>(seed % 16);
}

/// Random mean-one IFR law with n_segments hazard segments: random knot gaps, positive
/// random rate increments (the first rate is zero with probability 1/4 when n > 1), and a
/// terminal point with probability 1/2. One segment without terminal is Exp(1).
[[nodiscard]] IfrSample random_ifr(std::uint64_t seed, std::size_t n_segments);

/// Like random_ifr, but redraws with derived seeds until mu2 lies in [1 + margin, 2 - margin].
/// The returned seed reproduces the sample through random_ifr.
[[nodiscard]] IfrSample random_interior_ifr(std::uint64_t seed, std::size_t n_segments,
                                            double margin = 1e-6);

/// RVaR by composite Simpson in the hazard variable v = -ln(1 - u), with a Richardson check
/// between `panels` and 2 * `panels`. Throws NonConvergence when the two disagree.
[[nodiscard]] double rvar_by_quadrature(const PiecewiseLinearHazard& d, double alpha,
                                        double beta, std::size_t panels = 10000);

/// E[X^r] as the integral of Q(u)^r over [0, 1], by the same scheme.
[[nodiscard]] double moment_by_quadrature(const PiecewiseLinearHazard& d, double r,
                                          std::size_t panels = 10000);

/// c * e^{-a x}, a comparison curve for survival functions.
struct ScaledExponential {
    double c;
    double a;
};

/// Ordered signs (+1 / -1) taken by S_f - S_g on (0, inf), with repeats merged.
/// Intervals on which the curves agree carry no sign and raise `equality_interval`.
struct CrossingPattern {
    std::vector<int> signs;
    bool equality_interval = false;

    [[nodiscard]] std::size_t sign_changes() const noexcept {
        return signs.empty() ? 0 : signs.size() - 1;
    }
};

[[nodiscard]] CrossingPattern crossing_pattern(const PiecewiseLinearHazard& f,
                                               const PiecewiseLinearHazard& g);
[[nodiscard]] CrossingPattern crossing_pattern(const PiecewiseLinearHazard& f,
                                               const ScaledExponential& g);

struct SuiteResult {
    std::string name;
    std::size_t checks = 0;
    std::size_t violations = 0;
    /// Smallest margin seen; negative beyond the slack means a violation.
    double worst_margin = std::numeric_limits<double>::infinity();
    std::optional<std::uint64_t> first_offending_seed;

    [[nodiscard]] bool passed() const noexcept { return violations == 0; }
};

struct EnvelopeConfig {
    std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 0.9};
    std::vector<double> betas{0.3, 0.6, 0.8, 0.95, 1.0};
    std::vector<double> retentions{0.25, 0.5, 1.0, 2.0, 3.0};
    std::size_t survival_points = 100;
    double survival_slack = 1e-12;
    double mean_slack = 1e-9;
    double meanvar_slack = 1e-7;
    double quadrature_tolerance = 1e-7;
    SearchOptions search;
};

/// Checks each sample against the survival envelope, the mean-only and mean-variance RVaR
/// bounds, the stop-loss bounds, the quadrature oracle, and the IFR / mean-one gate.
[[nodiscard]] std::vector<SuiteResult> run_envelope_suites(std::span<const IfrSample> samples,
                                                           const EnvelopeConfig& config = {});

}  // namespace ifr::oracle
