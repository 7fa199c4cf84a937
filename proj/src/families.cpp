#include "ifr/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ifr/errors.hpp"
#include "ifr/numerics.hpp"

namespace ifr {

using numerics::phi1;
using numerics::phi2;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_interior_mu2(double mu2, const char* who) {
    if (!(mu2 > 1.0 && mu2 < 2.0)) {
        throw Infeasible(std::string(who) + ": normalized second moment must lie in (1, 2), got " +
                         std::to_string(mu2));
    }
}

CalibratedMember make_member(FamilyTag tag, std::vector<NamedValue> params,
                             PiecewiseLinearHazard d, std::optional<double> mu2) {
    CalibratedMember m{tag, std::move(params), std::move(d), {}};
    m.residuals.push_back({"mean", mean(m.distribution) - 1.0});
    if (mu2) m.residuals.push_back({"second_moment", moment(m.distribution, 2.0) - *mu2});
    return m;
}

// Second moment of the mean-one truncated exponential with s = rate * truncation point.
double gt1_second_moment(double s) {
    const double p = phi1(s);
    return 2.0 * phi2(s) / (p * p);
}

// Normalized variance factor of a truncated exponential: Var = L^2 * v(z), z = k * L.
double variance_factor(double z) {
    const double p = phi1(z);
    return 2.0 * phi2(z) - p * p;
}

// Truncation point of the delayed member whose exponential part has z = k * L.
double g1_endpoint(double z, double sigma) {
    return 1.0 + sigma * (1.0 - phi1(z)) / std::sqrt(variance_factor(z));
}

double gt1_s(double mu2) {
    double hi = 1.0;
    while (gt1_second_moment(hi) < mu2) hi *= 2.0;
    return numerics::bisect_root([mu2](double s) { return gt1_second_moment(s) - mu2; }, 0.0, hi)
        .x;
}

CalibratedMember calibrate_g1_impl(double T, double mu2, double s, double t1) {
    const double sigma = std::sqrt(mu2 - 1.0);
    if (std::isinf(T)) {
        const double delta = 1.0 - sigma;
        return make_member(FamilyTag::g1, {{"T", kInf}, {"k", 1.0 / sigma}, {"delta", delta}},
                           PiecewiseLinearHazard({0.0, delta}, {0.0, 1.0 / sigma}), mu2);
    }
    if (T < t1 * (1.0 - 1e-12)) {
        throw Infeasible("calibrate_g1: T must be at least T1 = " + std::to_string(t1));
    }
    if (T <= t1 * (1.0 + 1e-12)) {
        const double a = -std::expm1(-s);
        return make_member(FamilyTag::g1, {{"T", t1}, {"k", a}, {"delta", 0.0}},
                           PiecewiseLinearHazard::truncated_exponential(a, t1), mu2);
    }
    double hi = 2.0 * s;
    while (g1_endpoint(hi, sigma) < T) hi *= 2.0;
    const double z =
        numerics::bisect_root([&](double x) { return g1_endpoint(x, sigma) - T; }, s, hi).x;
    const double len = sigma / std::sqrt(variance_factor(z));
    const double delta = 1.0 - len * phi1(z);
    const double k = z / len;
    if (delta <= 0.0) {
        return make_member(FamilyTag::g1, {{"T", T}, {"k", k}, {"delta", 0.0}},
                           PiecewiseLinearHazard::truncated_exponential(k, T), mu2);
    }
    return make_member(FamilyTag::g1, {{"T", T}, {"k", k}, {"delta", delta}},
                       PiecewiseLinearHazard({0.0, delta}, {0.0, k}, T), mu2);
}

// Mean-one two-rate member: tail mean beyond T is c = 1 - T phi1(k1 T), so 1/k2 = c e^{k1 T}.
double g2_second_moment(double k1, double T) {
    const double z = k1 * T;
    const double c = 1.0 - T * phi1(z);
    return 2.0 * (T * T * phi2(z) + T * c + c * c * std::exp(z));
}

CalibratedMember calibrate_g2_impl(double T, double mu2, double a, double t1) {
    const double sigma = std::sqrt(mu2 - 1.0);
    const double t0 = 1.0 - sigma;
    if (T < t0 - 1e-12 || !(T < t1)) {
        throw Infeasible("calibrate_g2: T must lie in [" + std::to_string(t0) + ", " +
                         std::to_string(t1) + ")");
    }
    if (T <= t0) {
        return make_member(FamilyTag::g2, {{"T", t0}, {"k1", 0.0}, {"k2", 1.0 / sigma}},
                           PiecewiseLinearHazard({0.0, t0}, {0.0, 1.0 / sigma}), mu2);
    }
    const double lo = T < 1.0 ? 0.0 : solve_w_for_t(T);
    double hi = a;
    const auto f = [&](double k1) { return g2_second_moment(k1, T) - mu2; };
    for (int i = 0; i < 60 && f(hi) < 0.0; ++i) hi *= 2.0;
    const double k1 = numerics::bisect_root(f, lo, hi).x;
    const double z = k1 * T;
    const double b = (1.0 - T * phi1(z)) * std::exp(z);
    if (!(b > 0.0)) {
        return make_member(FamilyTag::g2, {{"T", T}, {"k1", k1}, {"k2", kInf}},
                           PiecewiseLinearHazard::truncated_exponential(k1, T), mu2);
    }
    const double k2 = 1.0 / b;
    if (k2 < k1 * (1.0 - 1e-12)) {
        throw NonConvergence("calibrate_g2: calibrated rates are not increasing", k1 - k2);
    }
    return make_member(FamilyTag::g2, {{"T", T}, {"k1", k1}, {"k2", k2}},
                       PiecewiseLinearHazard({0.0, T}, {k1, std::max(k1, k2)}), mu2);
}

}  // namespace

std::string_view to_string(FamilyTag tag) noexcept {
    switch (tag) {
        case FamilyTag::fstar: return "FSTAR";
        case FamilyTag::gt1: return "GT1";
        case FamilyTag::g1: return "G1";
        case FamilyTag::g2: return "G2";
        case FamilyTag::exp1: return "EXP1";
        case FamilyTag::dirac1: return "DIRAC1";
    }
    return "UNKNOWN";
}

double CalibratedMember::parameter(std::string_view name) const {
    for (const auto& p : parameters) {
        if (p.name == name) return p.value;
    }
    throw InvalidArgument("member has no parameter '" + std::string(name) + "'");
}

double CalibratedMember::residual(std::string_view name) const {
    for (const auto& r : residuals) {
        if (r.name == name) return r.value;
    }
    throw InvalidArgument("member has no residual '" + std::string(name) + "'");
}

double CalibratedMember::max_abs_residual() const noexcept {
    double worst = 0.0;
    for (const auto& r : residuals) worst = std::max(worst, std::abs(r.value));
    return worst;
}

MomentConstraint MomentConstraint::mean_only(double mean) {
    MomentConstraint c;
    c.mean = mean;
    c.validate();
    return c;
}

MomentConstraint MomentConstraint::mean_variance(double mean, double second_moment) {
    MomentConstraint c;
    c.mean = mean;
    c.second_moment = second_moment;
    c.validate();
    return c;
}

MomentConstraint MomentConstraint::rth_moment(double r, double value) {
    MomentConstraint c;
    c.moment_order = r;
    c.moment_value = value;
    c.validate();
    return c;
}

void MomentConstraint::validate() const {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw InvalidArgument("mean must be positive");
    if (second_moment && (!(*second_moment > 0.0) || !std::isfinite(*second_moment))) {
        throw InvalidArgument("second moment must be positive");
    }
    if (moment_order.has_value() != moment_value.has_value()) {
        throw InvalidArgument("r-th moment constraint needs both the order and the value");
    }
    if (moment_order) {
        if (second_moment) {
            throw InvalidArgument("combine either a second moment or an r-th moment, not both");
        }
        if (!(*moment_order > 0.0) || !std::isfinite(*moment_order)) {
            throw InvalidArgument("moment order must be positive");
        }
        if (!(*moment_value > 0.0) || !std::isfinite(*moment_value)) {
            throw InvalidArgument("moment value must be positive");
        }
    }
}

std::optional<double> MomentConstraint::normalized_second_moment() const {
    if (!second_moment) return std::nullopt;
    return *second_moment / (mean * mean);
}

Degeneracy classify_second_moment(double mu2) {
    if (!(mu2 >= 1.0 - kEndpointTolerance && mu2 <= 2.0 + kEndpointTolerance)) {
        throw Infeasible("normalized second moment " + std::to_string(mu2) +
                         " is outside [1, 2]; no IFR distribution matches it");
    }
    if (mu2 <= 1.0 + kEndpointTolerance) return Degeneracy::dirac;
    if (mu2 >= 2.0 - kEndpointTolerance) return Degeneracy::exponential;
    return Degeneracy::none;
}

double solve_w_for_t(double t) {
    if (!(t >= 1.0)) throw Infeasible("solve_w_for_t: t must be at least 1");
    if (t == 1.0) return 0.0;
    if (std::isinf(t)) return 1.0;
    // With q = -ln(1 - w) the equation reads phi1(q) = 1 / t.
    const auto f = [t](double q) { return t * phi1(q) - 1.0; };
    const double q = numerics::bisect_root(f, std::max(0.0, t - 1.0), t).x;
    return -std::expm1(-q);
}

CalibratedMember fstar_member(double w) {
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("fstar_member: w must lie in [0, 1]");
    if (w == 0.0) {
        return make_member(FamilyTag::fstar, {{"w", 0.0}, {"t", 1.0}},
                           PiecewiseLinearHazard::dirac(1.0), std::nullopt);
    }
    if (w == 1.0) {
        return make_member(FamilyTag::fstar, {{"w", 1.0}, {"t", kInf}},
                           PiecewiseLinearHazard::exponential(1.0), std::nullopt);
    }
    const double t = -std::log1p(-w) / w;
    return make_member(FamilyTag::fstar, {{"w", w}, {"t", t}},
                       PiecewiseLinearHazard::truncated_exponential(w, t), std::nullopt);
}

CalibratedMember exp1_member() {
    return make_member(FamilyTag::exp1, {}, PiecewiseLinearHazard::exponential(1.0), 2.0);
}

CalibratedMember dirac1_member() {
    return make_member(FamilyTag::dirac1, {}, PiecewiseLinearHazard::dirac(1.0), 1.0);
}

CalibratedMember calibrate_gt1(double mu2) {
    require_interior_mu2(mu2, "calibrate_gt1");
    const double s = gt1_s(mu2);
    const double a = -std::expm1(-s);
    const double t1 = 1.0 / phi1(s);
    return make_member(FamilyTag::gt1, {{"a", a}, {"T1", t1}, {"s", s}},
                       PiecewiseLinearHazard::truncated_exponential(a, t1), mu2);
}

CalibratedMember calibrate_g1(double T, double mu2) {
    require_interior_mu2(mu2, "calibrate_g1");
    if (!(T > 0.0)) throw InvalidArgument("calibrate_g1: T must be positive");
    const auto gt1 = calibrate_gt1(mu2);
    return calibrate_g1_impl(T, mu2, gt1.parameter("s"), gt1.parameter("T1"));
}

CalibratedMember calibrate_g2(double T, double mu2) {
    require_interior_mu2(mu2, "calibrate_g2");
    if (std::isnan(T)) throw InvalidArgument("calibrate_g2: T is NaN");
    const auto gt1 = calibrate_gt1(mu2);
    return calibrate_g2_impl(T, mu2, gt1.parameter("a"), gt1.parameter("T1"));
}

double g2_lower_endpoint(double mu2) {
    require_interior_mu2(mu2, "g2_lower_endpoint");
    return 1.0 - std::sqrt(mu2 - 1.0);
}

MeanVarianceFamilies::MeanVarianceFamilies(double mu2, std::size_t grid_points)
    : mu2_(mu2),
      sigma_(std::sqrt(mu2 - 1.0)),
      t0_(1.0 - sigma_),
      gt1_(calibrate_gt1(mu2)),
      grid_points_(grid_points) {
    if (grid_points < 2) throw InvalidArgument("MeanVarianceFamilies: need >= 2 grid points");
    g1_grid_.reserve(grid_points);
    g2_grid_.reserve(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        g1_grid_.push_back(g1_at(g1_grid_parameter(i)));
        g2_grid_.push_back(g2_at(g2_grid_parameter(i)));
    }
    // Along increasing T (decreasing u) both k and delta must be nondecreasing.
    for (std::size_t i = grid_points - 1; i-- > 0;) {
        const auto& cur = g1_grid_[i];
        const auto& next = g1_grid_[i + 1];
        const double k_cur = cur.tag == FamilyTag::gt1 ? cur.parameter("a") : cur.parameter("k");
        const double k_next =
            next.tag == FamilyTag::gt1 ? next.parameter("a") : next.parameter("k");
        const double d_cur = cur.tag == FamilyTag::gt1 ? 0.0 : cur.parameter("delta");
        const double d_next = next.tag == FamilyTag::gt1 ? 0.0 : next.parameter("delta");
        if (k_cur < k_next * (1.0 - 1e-9) || d_cur < d_next - 1e-12) {
            throw NonConvergence("g1 calibration is not monotone in T", k_next - k_cur);
        }
    }
}

double MeanVarianceFamilies::g1_grid_parameter(std::size_t i) const {
    const std::size_t n = grid_points_;
    return i + 1 == n ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
}

double MeanVarianceFamilies::g2_grid_parameter(std::size_t i) const {
    const std::size_t n = grid_points_;
    if (i + 1 == n) return t1();
    return t0_ + (t1() - t0_) * static_cast<double>(i) / static_cast<double>(n - 1);
}

CalibratedMember MeanVarianceFamilies::g1_at(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("g1_at: u must lie in [0, 1]");
    if (u == 1.0) return gt1_;
    const double T = u == 0.0 ? kInf : t1() / u;
    return calibrate_g1_impl(T, mu2_, gt1_.parameter("s"), t1());
}

CalibratedMember MeanVarianceFamilies::g2_at(double T) const {
    if (T >= t1()) return gt1_;
    return calibrate_g2_impl(std::max(T, t0_), mu2_, gt1_.parameter("a"), t1());
}

}  // namespace ifr
