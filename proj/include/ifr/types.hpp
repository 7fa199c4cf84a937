#pragma once

#include <string_view>

namespace ifr {

/// Which quantile version to use at flat parts and jumps of a distribution function.
enum class Side { left, right };

/// Optimization direction of a bound.
enum class Direction { sup, inf };

[[nodiscard]] constexpr std::string_view to_string(Direction d) noexcept {
    return d == Direction::sup ? "sup" : "inf";
}

[[nodiscard]] constexpr std::string_view to_string(Side s) noexcept {
    return s == Side::left ? "left" : "right";
}

}  // namespace ifr
