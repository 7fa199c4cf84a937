#include "ifr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "ifr/errors.hpp"

namespace ifr::numerics {

double phi1(double z) {
    if (z == 0.0) return 1.0;
    if (std::isinf(z)) return 0.0;
    return -std::expm1(-z) / z;
}

double phi2(double z) {
    if (std::isinf(z)) return 0.0;
    if (std::abs(z) < 0.5) {
        // sum_k (-z)^k / (k! (k + 2))
        double term = 1.0;
        double sum = 0.5;
        for (int k = 1; k < 30; ++k) {
            term *= -z / k;
            sum += term / (k + 2);
        }
        return sum;
    }
    return (-std::expm1(-z) - z * std::exp(-z)) / (z * z);
}

Root bisect_root(const std::function<double(double)>& f, double lo, double hi,
                 std::uintmax_t max_iter) {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, 0, hi - lo};
    if (fhi == 0.0) return {hi, 0.0, 0, hi - lo};
    if (std::signbit(flo) == std::signbit(fhi)) {
        throw InvalidArgument("bisect_root: no sign change on [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    }
    const auto close = [](double a, double b) {
        return std::abs(b - a) <=
               4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)) +
                   std::numeric_limits<double>::min();
    };
    std::uintmax_t iters = max_iter;
    const auto [a, b] = boost::math::tools::bisect(f, lo, hi, close, iters);
    if (!close(a, b)) {
        throw NonConvergence("bisect_root: iteration budget exhausted", b - a);
    }
    const double fa = f(a);
    const double fb = f(b);
    return std::abs(fa) <= std::abs(fb) ? Root{a, fa, iters, b - a} : Root{b, fb, iters, b - a};
}

Extremum refine_extremum(const std::function<double(double)>& f, double lo, double hi,
                         Direction dir, double x_tol, std::uintmax_t max_iter) {
    if (!(lo <= hi)) throw InvalidArgument("refine_extremum: empty interval");
    if (lo == hi) return {lo, f(lo), 0, 0.0};
    const double sign = dir == Direction::sup ? -1.0 : 1.0;
    const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
    // Brent cannot resolve the abscissa beyond half the mantissa.
    const int bits = std::clamp(static_cast<int>(std::ceil(1.0 - std::log2(x_tol / scale))), 8,
                                std::numeric_limits<double>::digits / 2);
    std::uintmax_t iters = max_iter;
    const auto [x, fx] = boost::math::tools::brent_find_minima(
        [&](double t) { return sign * f(t); }, lo, hi, bits, iters);
    return {x, sign * fx, iters, std::ldexp(scale, 1 - bits)};
}

Extremum grid_extremum(const std::function<double(double)>& f, double lo, double hi,
                       std::size_t points, Direction dir, double x_tol) {
    if (points < 2) throw InvalidArgument("grid_extremum: need at least two grid points");
    std::vector<double> xs(points);
    for (std::size_t i = 0; i < points; ++i) {
        xs[i] = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    }
    std::size_t best = 0;
    double best_value = f(xs[0]);
    for (std::size_t i = 1; i < points; ++i) {
        const double v = f(xs[i]);
        if (better(v, best_value, dir)) {
            best = i;
            best_value = v;
        }
    }
    const double a = xs[best == 0 ? 0 : best - 1];
    const double b = xs[std::min(best + 1, points - 1)];
    Extremum refined = refine_extremum(f, a, b, dir, x_tol);
    if (!better(refined.value, best_value, dir)) {
        refined.x = xs[best];
        refined.value = best_value;
    }
    refined.iterations += points;
    return refined;
}

}  // namespace ifr::numerics
