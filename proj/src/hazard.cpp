#include "ifr/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ifr/errors.hpp"
#include "ifr/numerics.hpp"

namespace ifr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_level(double p, const char* who) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument(std::string(who) + ": level must lie in [0, 1], got " +
                              std::to_string(p));
    }
}

void require_retention(double t, const char* who) {
    if (!(t >= 0.0)) {
        throw InvalidArgument(std::string(who) + ": retention must be nonnegative");
    }
}

}  // namespace

PiecewiseLinearHazard::PiecewiseLinearHazard(std::vector<double> knots, std::vector<double> rates,
                                             std::optional<double> terminal)
    : knots_(std::move(knots)), rates_(std::move(rates)), terminal_(terminal) {
    if (knots_.empty()) throw InvalidArgument("hazard: at least one segment is required");
    if (knots_.front() != 0.0) throw InvalidArgument("hazard: the first knot must be 0");
    if (rates_.size() != knots_.size()) {
        throw InvalidArgument("hazard: expected one rate per knot, got " +
                              std::to_string(rates_.size()) + " rates for " +
                              std::to_string(knots_.size()) + " knots");
    }
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (!std::isfinite(knots_[i]) || !(knots_[i] > knots_[i - 1])) {
            throw InvalidArgument("hazard: knots must be finite and strictly increasing");
        }
    }
    for (double r : rates_) {
        if (!std::isfinite(r) || r < 0.0) {
            throw InvalidArgument("hazard: rates must be finite and nonnegative");
        }
    }
    if (terminal_) {
        if (!std::isfinite(*terminal_) || !(*terminal_ > knots_.back())) {
            throw InvalidArgument("hazard: terminal point must be finite and beyond the last knot");
        }
    } else if (!(rates_.back() > 0.0)) {
        throw InvalidArgument("hazard: the last rate must be positive when there is no terminal");
    }
    hazard_at_knot_.resize(knots_.size());
    hazard_at_knot_[0] = 0.0;
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        hazard_at_knot_[i] = hazard_at_knot_[i - 1] + rates_[i - 1] * (knots_[i] - knots_[i - 1]);
    }
}

PiecewiseLinearHazard PiecewiseLinearHazard::exponential(double rate) {
    if (!(rate > 0.0)) throw InvalidArgument("exponential: rate must be positive");
    return PiecewiseLinearHazard({0.0}, {rate});
}

PiecewiseLinearHazard PiecewiseLinearHazard::dirac(double at) {
    if (!(at > 0.0)) throw InvalidArgument("dirac: location must be positive");
    return PiecewiseLinearHazard({0.0}, {0.0}, at);
}

PiecewiseLinearHazard PiecewiseLinearHazard::truncated_exponential(double rate, double terminal) {
    return PiecewiseLinearHazard({0.0}, {rate}, terminal);
}

double PiecewiseLinearHazard::segment_end(std::size_t i) const noexcept {
    if (i + 1 < knots_.size()) return knots_[i + 1];
    return terminal_.value_or(kInf);
}

double PiecewiseLinearHazard::hazard_at_segment_end(std::size_t i) const noexcept {
    const double end = segment_end(i);
    if (std::isinf(end)) return rates_[i] > 0.0 ? kInf : hazard_at_knot_[i];
    return hazard_at_knot_[i] + rates_[i] * (end - knots_[i]);
}

std::size_t PiecewiseLinearHazard::segment_of(double x) const noexcept {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

double PiecewiseLinearHazard::cumulative_hazard(double x) const {
    if (std::isnan(x)) throw InvalidArgument("cumulative_hazard: NaN argument");
    if (x <= 0.0) return 0.0;
    if (terminal_ && x >= *terminal_) return kInf;
    if (std::isinf(x)) return kInf;
    const std::size_t i = segment_of(x);
    return hazard_at_knot_[i] + rates_[i] * (x - knots_[i]);
}

double PiecewiseLinearHazard::cumulative_hazard_left(double x) const {
    if (std::isnan(x)) throw InvalidArgument("cumulative_hazard_left: NaN argument");
    if (x <= 0.0) return 0.0;
    if (terminal_ && x > *terminal_) return kInf;
    if (std::isinf(x)) return kInf;
    const std::size_t i = segment_of(x);
    return hazard_at_knot_[i] + rates_[i] * (x - knots_[i]);
}

double survival(const PiecewiseLinearHazard& d, double x) {
    if (!(x >= 0.0)) throw InvalidArgument("survival: x must be >= 0");
    return std::exp(-d.cumulative_hazard(x));
}

double survival_left(const PiecewiseLinearHazard& d, double x) {
    if (!(x >= 0.0)) throw InvalidArgument("survival_left: x must be >= 0");
    return std::exp(-d.cumulative_hazard_left(x));
}

double inverse_cumulative_hazard(const PiecewiseLinearHazard& d, double level, Side side) {
    if (!(level >= 0.0)) throw InvalidArgument("inverse_cumulative_hazard: level must be >= 0");
    const auto knots = d.knots();
    const auto rates = d.rates();
    for (std::size_t i = 0; i < d.segment_count(); ++i) {
        const double h_end = d.hazard_at_segment_end(i);
        const bool reached = side == Side::left ? h_end >= level : h_end > level;
        if (!reached) continue;
        if (rates[i] == 0.0) return knots[i];
        const double x = knots[i] + std::max(0.0, level - d.hazard_at_knot(i)) / rates[i];
        return std::min(x, d.segment_end(i));
    }
    return essential_supremum(d);
}

double essential_infimum(const PiecewiseLinearHazard& d) {
    return inverse_cumulative_hazard(d, 0.0, Side::right);
}

double essential_supremum(const PiecewiseLinearHazard& d) { return d.terminal().value_or(kInf); }

double quantile(const PiecewiseLinearHazard& d, double p, Side side) {
    require_level(p, "quantile");
    if (p == 0.0) return essential_infimum(d);
    if (p == 1.0) return essential_supremum(d);
    return inverse_cumulative_hazard(d, -std::log1p(-p), side);
}

double moment(const PiecewiseLinearHazard& d, double r) {
    using numerics::phi1;
    using numerics::phi2;
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("moment: order must be positive");
    const auto knots = d.knots();
    const auto rates = d.rates();
    double total = 0.0;
    for (std::size_t i = 0; i < d.segment_count(); ++i) {
        const double s0 = std::exp(-d.hazard_at_knot(i));
        if (s0 == 0.0) break;
        const double a = knots[i];
        const double lam = rates[i];
        const double end = d.segment_end(i);
        const bool unbounded = std::isinf(end);
        const double len = end - a;
        double piece = 0.0;
        if (r == 1.0) {
            piece = unbounded ? 1.0 / lam : len * phi1(lam * len);
        } else if (r == 2.0) {
            piece = unbounded ? 2.0 * (a / lam + 1.0 / (lam * lam))
                              : 2.0 * (a * len * phi1(lam * len) + len * len * phi2(lam * len));
        } else if (unbounded && a == 0.0) {
            piece = boost::math::tgamma(r + 1.0) / std::pow(lam, r);
        } else if (unbounded) {
            boost::math::quadrature::exp_sinh<double> integrator;
            piece = integrator.integrate(
                [&](double y) {
                    if (!std::isfinite(y)) return 0.0;
                    return r * std::exp((r - 1.0) * std::log(a + y) - lam * y);
                },
                0.0, kInf, 1e-13);
        } else {
            const auto f = [&](double x) {
                return r * std::pow(x, r - 1.0) * std::exp(-lam * (x - a));
            };
            if (a == 0.0 && r < 1.0) {
                boost::math::quadrature::tanh_sinh<double> integrator;
                piece = integrator.integrate(f, a, end, 1e-13);
            } else {
                piece = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, end, 15,
                                                                                      1e-13);
            }
        }
        total += s0 * piece;
    }
    return total;
}

namespace {

// Integral of the left quantile over [alpha, beta], segment by segment in closed form.
double quantile_integral(const PiecewiseLinearHazard& d, double alpha, double beta) {
    const auto knots = d.knots();
    const auto rates = d.rates();
    double total = 0.0;
    for (std::size_t i = 0; i < d.segment_count(); ++i) {
        const double lam = rates[i];
        if (lam == 0.0) continue;
        const double h0 = d.hazard_at_knot(i);
        const double h1 = d.hazard_at_segment_end(i);
        const double p0 = -std::expm1(-h0);
        const double p1 = std::isinf(h1) ? 1.0 : -std::expm1(-h1);
        const double lo = std::max(alpha, p0);
        const double hi = std::min(beta, p1);
        if (!(lo < hi)) continue;
        const double end = d.segment_end(i);
        const double x_lo =
            lo == p0 ? knots[i] : std::min(knots[i] + (-std::log1p(-lo) - h0) / lam, end);
        const double s_lo = lo == p0 ? std::exp(-h0) : 1.0 - lo;
        if (hi == 1.0) {
            total += s_lo * (x_lo + 1.0 / lam);
            continue;
        }
        const double x_hi =
            hi == p1 ? end : std::min(knots[i] + (-std::log1p(-hi) - h0) / lam, end);
        const double dx = x_hi - x_lo;
        total += x_lo * (hi - lo) + s_lo * lam * dx * dx * numerics::phi2(lam * dx);
    }
    if (const auto t = d.terminal()) {
        const double p_atom = -std::expm1(-d.hazard_at_segment_end(d.segment_count() - 1));
        const double lo = std::max(alpha, p_atom);
        if (lo < beta) total += *t * (beta - lo);
    }
    return total;
}

}  // namespace

double rvar(const PiecewiseLinearHazard& d, double alpha, double beta) {
    require_level(alpha, "rvar");
    require_level(beta, "rvar");
    if (!(alpha < beta)) throw InvalidArgument("rvar: requires alpha < beta");
    return quantile_integral(d, alpha, beta) / (beta - alpha);
}

double tvar(const PiecewiseLinearHazard& d, double alpha) {
    require_level(alpha, "tvar");
    if (alpha == 1.0) return essential_supremum(d);
    return rvar(d, alpha, 1.0);
}

double stop_loss(const PiecewiseLinearHazard& d, double t) {
    require_retention(t, "stop_loss");
    const auto knots = d.knots();
    const auto rates = d.rates();
    double total = 0.0;
    for (std::size_t i = 0; i < d.segment_count(); ++i) {
        const double end = d.segment_end(i);
        if (!(end > t)) continue;
        const double lam = rates[i];
        const double from = std::max(knots[i], t);
        const double s_from = std::exp(-(d.hazard_at_knot(i) + lam * (from - knots[i])));
        if (std::isinf(end)) {
            total += s_from / lam;
        } else {
            const double len = end - from;
            total += s_from * len * numerics::phi1(lam * len);
        }
    }
    return total;
}

double limited_loss(const PiecewiseLinearHazard& d, double t) {
    require_retention(t, "limited_loss");
    const auto knots = d.knots();
    const auto rates = d.rates();
    double total = 0.0;
    for (std::size_t i = 0; i < d.segment_count(); ++i) {
        if (!(knots[i] < t)) break;
        const double lam = rates[i];
        const double to = std::min(d.segment_end(i), t);
        const double s0 = std::exp(-d.hazard_at_knot(i));
        if (std::isinf(to)) {
            total += s0 / lam;
        } else {
            const double len = to - knots[i];
            total += s0 * len * numerics::phi1(lam * len);
        }
    }
    return total;
}

double ttt(const PiecewiseLinearHazard& d, double u) {
    require_level(u, "ttt");
    if (u == 0.0) return 0.0;
    if (u == 1.0) return 1.0;
    return limited_loss(d, quantile(d, u, Side::left)) / mean(d);
}

bool is_ifr(const PiecewiseLinearHazard& d) noexcept {
    const auto rates = d.rates();
    return std::is_sorted(rates.begin(), rates.end());
}

PiecewiseLinearHazard scale(const PiecewiseLinearHazard& d, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("scale: factor must be positive");
    std::vector<double> knots(d.knots().begin(), d.knots().end());
    std::vector<double> rates(d.rates().begin(), d.rates().end());
    for (double& k : knots) k *= c;
    for (double& r : rates) r /= c;
    std::optional<double> terminal = d.terminal();
    if (terminal) *terminal *= c;
    return PiecewiseLinearHazard(std::move(knots), std::move(rates), terminal);
}

}  // namespace ifr
