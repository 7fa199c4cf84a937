#include "ifr/serialization.hpp"

#include <optional>
#include <vector>

#include "ifr/errors.hpp"

namespace ifr {

namespace {

std::vector<double> number_array(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) {
        throw InvalidArgument(std::string("hazard json: '") + key + "' must be an array");
    }
    std::vector<double> out;
    out.reserve(j[key].size());
    for (const auto& v : j[key]) {
        if (!v.is_number()) {
            throw InvalidArgument(std::string("hazard json: '") + key + "' must hold numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

nlohmann::json hazard_to_json(const PiecewiseLinearHazard& d) {
    nlohmann::json j;
    j["knots"] = std::vector<double>(d.knots().begin(), d.knots().end());
    j["slopes"] = std::vector<double>(d.rates().begin(), d.rates().end());
    j["terminal"] = d.terminal() ? nlohmann::json(*d.terminal()) : nlohmann::json(nullptr);
    return j;
}

PiecewiseLinearHazard hazard_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("hazard json: expected an object");
    auto knots = number_array(j, "knots");
    auto slopes = number_array(j, "slopes");
    std::optional<double> terminal;
    if (j.contains("terminal") && !j["terminal"].is_null()) {
        if (!j["terminal"].is_number()) {
            throw InvalidArgument("hazard json: 'terminal' must be null or a number");
        }
        terminal = j["terminal"].get<double>();
    }
    return PiecewiseLinearHazard(std::move(knots), std::move(slopes), terminal);
}

std::string dump_hazard(const PiecewiseLinearHazard& d) { return hazard_to_json(d).dump(); }

PiecewiseLinearHazard parse_hazard(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(std::string("hazard json: ") + e.what());
    }
    return hazard_from_json(j);
}

}  // namespace ifr
