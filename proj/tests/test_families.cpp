#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "ifr/errors.hpp"
#include "ifr/families.hpp"
#include "ifr/hazard.hpp"
#include "ifr/numerics.hpp"
#include "ifr/oracle.hpp"

using namespace ifr;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double survival_distance(const PiecewiseLinearHazard& f, const PiecewiseLinearHazard& g,
                         double upto) {
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double x = upto * i / 4000.0;
        worst = std::max(worst, std::abs(survival(f, x) - survival(g, x)));
        worst = std::max(worst, std::abs(survival_left(f, x) - survival_left(g, x)));
    }
    return worst;
}

}  // namespace

TEST(SolveW, FrozenValuesAndResidual) {
    EXPECT_NEAR(solve_w_for_t(2.0), 0.79681213002002, 1e-13);
    EXPECT_EQ(solve_w_for_t(1.0), 0.0);
    for (double t : {1.01, 1.5, 2.0, 5.0, 20.0, 50.0}) {
        const double w = solve_w_for_t(t);
        EXPECT_LE(std::abs(std::exp(-w * t) - (1.0 - w)), 1e-13) << t;
    }
    EXPECT_GT(solve_w_for_t(50.0), 1.0 - 1e-15 - std::exp(-49.0));
    EXPECT_THROW((void)solve_w_for_t(0.5), Infeasible);
}

TEST(SolveW, IncreasingInT) {
    double prev = 0.0;
    for (double t = 1.05; t < 30.0; t *= 1.1) {
        const double w = solve_w_for_t(t);
        EXPECT_GT(w, prev);
        prev = w;
    }
}

TEST(Fstar, MembersHaveMeanOne) {
    for (double w : {0.0, 0.1, 0.5, 0.9, 0.999, 1.0}) {
        const auto m = fstar_member(w);
        EXPECT_EQ(m.tag, FamilyTag::fstar);
        EXPECT_NEAR(mean(m.distribution), 1.0, 1e-13) << w;
        EXPECT_LE(m.max_abs_residual(), 1e-13);
    }
    EXPECT_NEAR(fstar_member(0.5).parameter("t"), 1.3862943611198906, 1e-15);
    EXPECT_EQ(fstar_member(0.0).distribution, PiecewiseLinearHazard::dirac());
    EXPECT_EQ(fstar_member(1.0).distribution, PiecewiseLinearHazard::exponential());
    EXPECT_THROW((void)fstar_member(1.5), InvalidArgument);
}

TEST(Fstar, CrossesAnyExponentialAtMostOnce) {
    for (double w : {0.05, 0.3, 0.5, 0.8, 0.95}) {
        const auto f = fstar_member(w).distribution;
        for (double a : {0.1, 0.5, 0.9, 1.0, 1.3, 3.0}) {
            const auto p = oracle::crossing_pattern(f, oracle::ScaledExponential{1.0, a});
            EXPECT_LE(p.sign_changes(), 1u) << "w=" << w << " a=" << a;
        }
    }
}

TEST(Endpoints, ClassifySecondMoment) {
    EXPECT_EQ(classify_second_moment(1.0), Degeneracy::dirac);
    EXPECT_EQ(classify_second_moment(1.0 + 1e-10), Degeneracy::dirac);
    EXPECT_EQ(classify_second_moment(1.5), Degeneracy::none);
    EXPECT_EQ(classify_second_moment(2.0 - 1e-10), Degeneracy::exponential);
    EXPECT_THROW((void)classify_second_moment(0.9), Infeasible);
    EXPECT_THROW((void)classify_second_moment(2.1), Infeasible);
    EXPECT_EQ(exp1_member().distribution, PiecewiseLinearHazard::exponential());
    EXPECT_EQ(dirac1_member().distribution, PiecewiseLinearHazard::dirac());
}

TEST(Constraint, Validation) {
    EXPECT_NO_THROW(MomentConstraint::mean_only(2.0).validate());
    EXPECT_THROW(MomentConstraint::mean_only(0.0).validate(), InvalidArgument);
    EXPECT_NEAR(*MomentConstraint::mean_variance(2.0, 6.0).normalized_second_moment(), 1.5, 1e-15);
    EXPECT_FALSE(MomentConstraint::mean_only().normalized_second_moment().has_value());
    EXPECT_THROW(MomentConstraint::rth_moment(-1.0, 1.0).validate(), InvalidArgument);
    EXPECT_THROW(MomentConstraint::rth_moment(2.0, 0.0).validate(), InvalidArgument);
}

TEST(Gt1, FrozenValues) {
    const auto m = calibrate_gt1(1.5);
    EXPECT_EQ(m.tag, FamilyTag::gt1);
    EXPECT_NEAR(m.parameter("a"), 0.8045218347935081, 1e-12);
    EXPECT_NEAR(m.parameter("T1"), 2.0289152166223494, 1e-12);
    EXPECT_LE(m.max_abs_residual(), 1e-10);
    EXPECT_THROW((void)calibrate_gt1(2.5), Infeasible);
}

TEST(G1, FrozenValues) {
    const auto m = calibrate_g1(3.0, 1.5);
    EXPECT_EQ(m.tag, FamilyTag::g1);
    EXPECT_NEAR(m.parameter("k"), 1.2517747439829219, 1e-11);
    EXPECT_NEAR(m.parameter("delta"), 0.2259302285492286, 1e-11);
    EXPECT_LE(m.max_abs_residual(), 1e-10);
}

TEST(G1, InfiniteTruncationIsShiftedExponential) {
    const auto m = calibrate_g1(kInf, 1.5);
    const double sigma = std::sqrt(0.5);
    EXPECT_NEAR(m.parameter("delta"), 1.0 - sigma, 1e-15);
    EXPECT_NEAR(m.parameter("k"), 1.0 / sigma, 1e-15);
    EXPECT_LE(m.max_abs_residual(), 1e-12);
}

TEST(G1, RejectsTruncationBelowT1) {
    EXPECT_THROW((void)calibrate_g1(1.5, 1.5), Infeasible);
}

TEST(G2, FrozenValues) {
    const double t_mid = 1.160904217717901;
    const auto m = calibrate_g2(t_mid, 1.5);
    EXPECT_EQ(m.tag, FamilyTag::g2);
    EXPECT_NEAR(m.parameter("k1"), 0.7255740025436372, 1e-11);
    EXPECT_NEAR(m.parameter("k2"), 1.9996473045861767, 1e-10);
    EXPECT_LE(m.max_abs_residual(), 1e-10);
    EXPECT_THROW((void)calibrate_g2(0.1, 1.5), Infeasible);
    EXPECT_THROW((void)calibrate_g2(2.1, 1.5), Infeasible);
}

TEST(G2, LowerEndpointIsShiftedExponential) {
    const auto lo = calibrate_g2(g2_lower_endpoint(1.5), 1.5);
    EXPECT_LE(survival_distance(lo.distribution, calibrate_g1(kInf, 1.5).distribution, 20.0),
              1e-12);
}

class FamilyGrid : public ::testing::TestWithParam<double> {};

TEST_P(FamilyGrid, ResidualsAndQuadratureAgreement) {
    const MeanVarianceFamilies fam(GetParam(), 32);
    auto check = [&](const CalibratedMember& m) {
        EXPECT_LE(m.max_abs_residual(), 1e-10) << to_string(m.tag);
        EXPECT_NEAR(oracle::moment_by_quadrature(m.distribution, 1.0), 1.0, 1e-7);
        EXPECT_NEAR(oracle::moment_by_quadrature(m.distribution, 2.0), GetParam(), 1e-7);
        EXPECT_TRUE(is_ifr(m.distribution));
    };
    for (const auto& m : fam.g1_grid()) check(m);
    for (const auto& m : fam.g2_grid()) check(m);
}

TEST_P(FamilyGrid, G1ParametersMonotoneInT) {
    const MeanVarianceFamilies fam(GetParam(), 64);
    // u = T1 / T decreases along the grid index's reverse; index 0 is T = inf.
    double prev_k = kInf;
    double prev_delta = kInf;
    for (const auto& m : fam.g1_grid()) {
        const double k = m.tag == FamilyTag::gt1 ? m.parameter("a") : m.parameter("k");
        const double delta = m.tag == FamilyTag::gt1 ? 0.0 : m.parameter("delta");
        EXPECT_LE(k, prev_k * (1.0 + 1e-12));
        EXPECT_LE(delta, prev_delta + 1e-12);
        prev_k = k;
        prev_delta = delta;
    }
}

TEST_P(FamilyGrid, G2RatesIncreasing) {
    const MeanVarianceFamilies fam(GetParam(), 64);
    for (const auto& m : fam.g2_grid()) {
        if (m.tag != FamilyTag::g2) continue;
        EXPECT_LE(m.parameter("k1"), m.parameter("k2"));
    }
}

TEST_P(FamilyGrid, G1ContinuousInU) {
    const MeanVarianceFamilies fam(GetParam(), 8);
    for (double u : {0.1, 0.4, 0.7, 0.95}) {
        const auto a = fam.g1_at(u);
        const auto b = fam.g1_at(u + 1e-7);
        EXPECT_LE(survival_distance(a.distribution, b.distribution, 30.0), 1e-5);
    }
    EXPECT_LE(survival_distance(fam.g1_at(1.0 - 1e-9).distribution, fam.gt1().distribution, 5.0),
              1e-6);
}

TEST_P(FamilyGrid, G2GluesOntoGt1) {
    const double mu2 = GetParam();
    const MeanVarianceFamilies fam(mu2, 8);
    // Locate the truncation point where the second rate reaches 1e8.
    const auto k2_minus = [&](double T) {
        return std::log(calibrate_g2(T, mu2).parameter("k2")) - std::log(1e8);
    };
    const double lo = 0.5 * (fam.t0() + fam.t1());
    const double T = numerics::bisect_root(k2_minus, lo, fam.t1() * (1.0 - 1e-15)).x;
    const auto m = calibrate_g2(T, mu2);
    EXPECT_GE(m.parameter("k2"), 0.99e8);
    EXPECT_LE(m.max_abs_residual(), 1e-10);
    EXPECT_NEAR(m.parameter("k1"), fam.gt1().parameter("a"), 1e-6);
    EXPECT_LE(survival_distance(m.distribution, fam.gt1().distribution, 5.0), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(SecondMoments, FamilyGrid, ::testing::Values(1.1, 1.3, 1.5, 1.7, 1.9));

TEST(Families, BoundaryMembersCarryGt1Tag) {
    const MeanVarianceFamilies fam(1.5, 16);
    EXPECT_EQ(fam.g1_at(1.0).tag, FamilyTag::gt1);
    EXPECT_EQ(fam.g2_at(fam.t1()).tag, FamilyTag::gt1);
    EXPECT_EQ(fam.g1_grid().back().tag, FamilyTag::gt1);
    EXPECT_EQ(fam.g2_grid().back().tag, FamilyTag::gt1);
    EXPECT_NEAR(fam.t0(), 1.0 - std::sqrt(0.5), 1e-15);
}
