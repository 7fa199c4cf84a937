#include <gtest/gtest.h>

#include "ifr/errors.hpp"
#include "ifr/hazard.hpp"
#include "ifr/oracle.hpp"
#include "ifr/serialization.hpp"

using namespace ifr;

TEST(Serialization, SchemaFields) {
    const auto j = hazard_to_json(PiecewiseLinearHazard::truncated_exponential(0.5, 2.0));
    EXPECT_EQ(j.at("knots"), nlohmann::json::array({0.0}));
    EXPECT_EQ(j.at("slopes"), nlohmann::json::array({0.5}));
    EXPECT_EQ(j.at("terminal"), 2.0);
    EXPECT_TRUE(hazard_to_json(PiecewiseLinearHazard::exponential()).at("terminal").is_null());
}

TEST(Serialization, RoundTripIsExact) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto d = oracle::random_ifr(seed, oracle::default_segment_count(seed)).distribution;
        EXPECT_EQ(parse_hazard(dump_hazard(d)), d) << "seed " << seed;
        EXPECT_EQ(nlohmann::json(d).get<PiecewiseLinearHazard>(), d);
    }
}

TEST(Serialization, RejectsSchemaErrors) {
    EXPECT_THROW((void)parse_hazard("not json"), InvalidArgument);
    EXPECT_THROW((void)parse_hazard(R"([1, 2])"), InvalidArgument);
    EXPECT_THROW((void)parse_hazard(R"({"slopes": [1]})"), InvalidArgument);
    EXPECT_THROW((void)parse_hazard(R"({"knots": [0], "slopes": ["a"]})"), InvalidArgument);
    EXPECT_THROW((void)parse_hazard(R"({"knots": [0], "slopes": [1], "terminal": "x"})"),
                 InvalidArgument);
    EXPECT_THROW((void)parse_hazard(R"({"knots": [0, 1], "slopes": [1]})"), InvalidArgument);
    EXPECT_THROW((void)parse_hazard(R"({"knots": [0], "slopes": [1], "terminal": -1})"),
                 InvalidArgument);
}

TEST(Serialization, MissingTerminalMeansNone) {
    const auto d = parse_hazard(R"({"knots": [0], "slopes": [2]})");
    EXPECT_EQ(d, PiecewiseLinearHazard::exponential(2.0));
}
