#include "ifr/distortion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ifr/errors.hpp"

namespace ifr {

namespace {

constexpr double kTol = 1e-12;

double parse_number(std::string_view text, std::string_view what) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw InvalidArgument("distortion: cannot parse parameter '" + std::string(text) +
                              "' for " + std::string(what));
    }
    return value;
}

}  // namespace

Distortion::Distortion(std::string name, Function h, std::vector<double> kinks)
    : name_(std::move(name)), h_(std::move(h)), kinks_(std::move(kinks)) {
    if (!h_) throw InvalidArgument("distortion: empty function");
    if (std::abs(h_(0.0)) > kTol) throw InvalidArgument("distortion " + name_ + ": h(0) != 0");
    if (std::abs(h_(1.0) - 1.0) > kTol) throw InvalidArgument("distortion " + name_ + ": h(1) != 1");
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = h_(i / 1000.0);
        if (!std::isfinite(v) || v < prev - kTol) {
            throw InvalidArgument("distortion " + name_ + ": h must be finite and nondecreasing");
        }
        prev = v;
    }
    std::erase_if(kinks_, [](double k) { return !(k > 0.0 && k < 1.0); });
    std::sort(kinks_.begin(), kinks_.end());
}

Distortion Distortion::identity() {
    return Distortion("identity", [](double u) { return u; });
}

Distortion Distortion::tvar(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidArgument("tvar distortion: alpha in [0, 1)");
    return Distortion(
        "tvar:" + std::to_string(alpha),
        [alpha](double u) { return std::min(u / (1.0 - alpha), 1.0); }, {1.0 - alpha});
}

Distortion Distortion::proportional_hazard(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("proportional-hazard: c > 0");
    return Distortion("proportional-hazard:" + std::to_string(c),
                      [c](double u) { return std::pow(u, 1.0 / c); });
}

Distortion Distortion::dual_power(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("power: c > 0");
    return Distortion("power:" + std::to_string(c),
                      [c](double u) { return -std::expm1(c * std::log1p(-u)); });
}

Distortion Distortion::tabulated(std::vector<double> u, std::vector<double> h) {
    if (u.size() != h.size() || u.size() < 2) {
        throw InvalidArgument("tabulated distortion: need matching columns with >= 2 rows");
    }
    if (u.front() != 0.0 || u.back() != 1.0) {
        throw InvalidArgument("tabulated distortion: abscissae must run from 0 to 1");
    }
    if (!std::is_sorted(u.begin(), u.end(), std::less_equal<>())) {
        throw InvalidArgument("tabulated distortion: abscissae must be strictly increasing");
    }
    std::vector<double> kinks(u.begin() + 1, u.end() - 1);
    auto f = [u = std::move(u), h = std::move(h)](double x) {
        if (x <= 0.0) return h.front();
        if (x >= 1.0) return h.back();
        const auto it = std::upper_bound(u.begin(), u.end(), x);
        const auto j = static_cast<std::size_t>(it - u.begin());
        const double w = (x - u[j - 1]) / (u[j] - u[j - 1]);
        return h[j - 1] + w * (h[j] - h[j - 1]);
    };
    return Distortion("tabulated", std::move(f), std::move(kinks));
}

bool Distortion::is_concave(std::size_t grid_points, double tol) const {
    if (grid_points < 3) grid_points = 3;
    const double step = 1.0 / static_cast<double>(grid_points - 1);
    for (std::size_t i = 0; i + 2 < grid_points; ++i) {
        const double a = i * step;
        const double b = (i + 2) * step;
        if (h_(0.5 * (a + b)) < 0.5 * (h_(a) + h_(b)) - tol) return false;
    }
    return true;
}

Distortion parse_distortion(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    if (name == "identity" && colon == std::string_view::npos) return Distortion::identity();
    if (colon == std::string_view::npos) {
        throw InvalidArgument("distortion: expected name:parameter, got '" + std::string(text) + "'");
    }
    const double p = parse_number(text.substr(colon + 1), name);
    if (name == "tvar") return Distortion::tvar(p);
    if (name == "proportional-hazard") return Distortion::proportional_hazard(p);
    if (name == "power") return Distortion::dual_power(p);
    throw InvalidArgument("distortion: unknown preset '" + std::string(name) + "'");
}

double distortion_value(const PiecewiseLinearHazard& d, const Distortion& h) {
    using boost::math::quadrature::gauss_kronrod;
    const auto f = [&h](double v) { return h(std::exp(-v)); };

    // Hazard levels where h may be non-smooth along the survival curve.
    std::vector<double> kink_levels;
    for (double k : h.kinks()) kink_levels.push_back(-std::log(k));
    std::sort(kink_levels.begin(), kink_levels.end());

    const auto knots = d.knots();
    const auto rates = d.rates();
    double total = 0.0;
    for (std::size_t i = 0; i < d.segment_count(); ++i) {
        const double lam = rates[i];
        const double v0 = d.hazard_at_knot(i);
        if (lam == 0.0) {
            total += h(std::exp(-v0)) * (d.segment_end(i) - knots[i]);
            continue;
        }
        // integral over the segment = (1/lam) * integral of h(e^{-v}) dv over [v0, v1]
        const double v1 = d.hazard_at_segment_end(i);
        std::vector<double> cuts{v0};
        for (double v : kink_levels) {
            if (v > v0 && v < v1) cuts.push_back(v);
        }
        cuts.push_back(v1);
        double piece = 0.0;
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            if (std::isinf(cuts[j + 1])) {
                double error = 0.0;
                double tail = 0.0;
                try {
                    boost::math::quadrature::exp_sinh<double> integrator;
                    tail = integrator.integrate([&](double y) { return f(cuts[j] + y); }, 0.0,
                                                std::numeric_limits<double>::infinity(), 1e-12,
                                                &error);
                } catch (const std::exception&) {
                    throw DivergentIntegral("distortion_value: tail integral of " + h.name() +
                                            " does not converge");
                }
                if (!std::isfinite(tail) || error > 1e-8 * (1.0 + std::abs(tail))) {
                    throw DivergentIntegral("distortion_value: tail integral of " + h.name() +
                                            " does not converge");
                }
                piece += tail;
            } else {
                piece += gauss_kronrod<double, 61>::integrate(f, cuts[j], cuts[j + 1], 15, 1e-12);
            }
        }
        total += piece / lam;
    }
    return total;
}

}  // namespace ifr
