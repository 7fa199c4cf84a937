#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "ifr/types.hpp"

namespace ifr::numerics {

/// (1 - e^{-z}) / z, extended continuously by 1 at z = 0 and by 0 at z = +inf.
[[nodiscard]] double phi1(double z);

/// (1 - e^{-z}(1 + z)) / z^2, extended continuously by 1/2 at z = 0 and by 0 at z = +inf.
[[nodiscard]] double phi2(double z);

struct Root {
    double x;
    double residual;
    std::uintmax_t iterations;
    double bracket_width;
};

/// Bisection on a sign-changing bracket, run down to a few ulps.
/// Throws InvalidArgument when f(lo) and f(hi) share a strict sign.
[[nodiscard]] Root bisect_root(const std::function<double(double)>& f, double lo, double hi,
                               std::uintmax_t max_iter = 400);

struct Extremum {
    double x;
    double value;
    std::uintmax_t iterations;
    double bracket_width;
};

/// Bounded Brent search for the maximum (sup) or minimum (inf) of f on [lo, hi].
[[nodiscard]] Extremum refine_extremum(const std::function<double(double)>& f, double lo,
                                       double hi, Direction dir, double x_tol,
                                       std::uintmax_t max_iter = 200);

/// Evaluates f on `points` equally spaced nodes of [lo, hi] (endpoints included), then
/// refines inside the two cells around the best node. Never returns worse than the grid.
[[nodiscard]] Extremum grid_extremum(const std::function<double(double)>& f, double lo,
                                     double hi, std::size_t points, Direction dir,
                                     double x_tol);

/// True when a is strictly better than b in direction dir.
[[nodiscard]] inline bool better(double a, double b, Direction dir) noexcept {
    return dir == Direction::sup ? a > b : a < b;
}

}  // namespace ifr::numerics
