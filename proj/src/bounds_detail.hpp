#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "ifr/bounds.hpp"
#include "ifr/numerics.hpp"

namespace ifr::detail {

inline BoundResult exact(Direction dir, double value, CalibratedMember member, double scale) {
    BoundResult r;
    r.direction = dir;
    r.value = value * scale;
    r.member = std::move(member);
    r.scale = scale;
    r.tolerance = 1e-15 * std::max(1.0, std::abs(r.value));
    return r;
}

/// Largest change of f across the final refinement bracket, used as an error estimate.
inline double bracket_spread(const std::function<double(double)>& f, const numerics::Extremum& e,
                             double lo, double hi) {
    const double a = std::max(lo, e.x - e.bracket_width);
    const double b = std::min(hi, e.x + e.bracket_width);
    return std::max(std::abs(f(a) - e.value), std::abs(f(b) - e.value));
}

}  // namespace ifr::detail
