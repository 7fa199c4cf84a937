#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "ifr/hazard.hpp"

namespace ifr {

/// {"knots": [...], "slopes": [...], "terminal": null | number}
[[nodiscard]] nlohmann::json hazard_to_json(const PiecewiseLinearHazard& d);
/// Inverse of hazard_to_json. Throws InvalidArgument on schema or representation errors.
[[nodiscard]] PiecewiseLinearHazard hazard_from_json(const nlohmann::json& j);

[[nodiscard]] std::string dump_hazard(const PiecewiseLinearHazard& d);
[[nodiscard]] PiecewiseLinearHazard parse_hazard(std::string_view text);

}  // namespace ifr

template <>
struct nlohmann::adl_serializer<ifr::PiecewiseLinearHazard> {
    static ifr::PiecewiseLinearHazard from_json(const json& j) { return ifr::hazard_from_json(j); }
    static void to_json(json& j, const ifr::PiecewiseLinearHazard& d) { j = ifr::hazard_to_json(d); }
};
