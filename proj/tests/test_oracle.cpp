#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "ifr/errors.hpp"
#include "ifr/families.hpp"
#include "ifr/hazard.hpp"
#include "ifr/oracle.hpp"

using namespace ifr;
using namespace ifr::oracle;

TEST(CounterRng, MatchesSplitMix64Reference) {
    // First SplitMix64 output from state 0.
    EXPECT_EQ(CounterRng(0).bits(0), 0xE220A8397B1DCDAFULL);
    const CounterRng rng(42);
    EXPECT_EQ(rng.bits(17), CounterRng(42).bits(17));
    EXPECT_NE(rng.bits(17), rng.bits(18));
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const double u = rng.uniform(k);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(RandomIfr, DeterministicPerSeed) {
    for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
        const auto a = random_ifr(seed, 5);
        const auto b = random_ifr(seed, 5);
        EXPECT_EQ(a.distribution, b.distribution);
        EXPECT_EQ(a.mu2, b.mu2);
    }
    EXPECT_NE(random_ifr(1, 5).distribution, random_ifr(2, 5).distribution);
}

TEST(RandomIfr, InvariantsOverTenThousandSeeds) {
    double lo = 2.0;
    double hi = 1.0;
    std::size_t with_terminal = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const auto s = random_ifr(seed, default_segment_count(seed));
        ASSERT_TRUE(is_ifr(s.distribution)) << seed;
        ASSERT_NEAR(mean(s.distribution), 1.0, 1e-9) << seed;
        ASSERT_GE(s.mu2, 1.0 - 1e-12) << seed;
        ASSERT_LE(s.mu2, 2.0 + 1e-12) << seed;
        ASSERT_EQ(s.distribution.segment_count(), s.n_segments);
        lo = std::min(lo, s.mu2);
        hi = std::max(hi, s.mu2);
        with_terminal += s.distribution.terminal().has_value();
    }
    // The corpus spreads over most of the feasible range and toggles atoms.
    EXPECT_LT(lo, 1.2);
    EXPECT_GT(hi, 1.95);
    EXPECT_GT(with_terminal, 4500u);
    EXPECT_LT(with_terminal, 5500u);
}

TEST(RandomIfr, SingleSegmentWithoutTerminalIsExp1) {
    std::size_t seen = 0;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        const auto s = random_ifr(seed, 1);
        if (s.distribution.terminal()) continue;
        ++seen;
        EXPECT_NEAR(s.distribution.rates()[0], 1.0, 1e-15);
        EXPECT_NEAR(s.mu2, 2.0, 1e-14);
    }
    EXPECT_GT(seen, 0u);
    EXPECT_THROW((void)random_ifr(0, 0), InvalidArgument);
}

TEST(RandomIfr, InteriorSamplesAvoidEndpoints) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto s = random_interior_ifr(seed, default_segment_count(seed));
        EXPECT_GE(s.mu2, 1.0 + 1e-6);
        EXPECT_LE(s.mu2, 2.0 - 1e-6);
        EXPECT_EQ(random_ifr(s.seed, s.n_segments).distribution, s.distribution);
    }
}

TEST(Quadrature, Examples) {
    const auto e = PiecewiseLinearHazard::exponential();
    EXPECT_NEAR(rvar_by_quadrature(e, 0.1, 0.2), 0.1630962304067587, 1e-10);
    for (auto [a, b] : {std::pair{0.0, 0.4}, {0.3, 0.31}, {0.7, 1.0}})
        EXPECT_NEAR(rvar_by_quadrature(PiecewiseLinearHazard::dirac(), a, b), 1.0, 1e-10);
    EXPECT_NEAR(rvar_by_quadrature(fstar_member(0.5).distribution, 0.0, 1.0), 1.0, 1e-7);
    EXPECT_NEAR(moment_by_quadrature(e, 2.0), 2.0, 1e-9);
    EXPECT_NEAR(moment_by_quadrature(fstar_member(0.5).distribution, 1.0), 1.0, 1e-9);
}

TEST(Quadrature, ReportsNonConvergence) {
    // Far too few panels for a steep hazard.
    const PiecewiseLinearHazard d({0.0, 1.0}, {0.01, 50.0});
    EXPECT_THROW((void)moment_by_quadrature(d, 2.0, 4), NonConvergence);
}

TEST(Crossing, SelfHasNoSigns) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = random_ifr(seed, default_segment_count(seed)).distribution;
        EXPECT_TRUE(crossing_pattern(d, d).signs.empty());
    }
}

TEST(Crossing, IfrAgainstExponentialHasAllowedPattern) {
    const std::set<std::vector<int>> allowed{{}, {-1}, {1}, {-1, 1}, {1, -1}, {-1, 1, -1}};
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto d = random_ifr(seed, default_segment_count(seed)).distribution;
        for (double c : {0.5, 1.0}) {
            for (double a : {0.3, 0.8, 1.0, 1.5, 4.0}) {
                const auto p = crossing_pattern(d, ScaledExponential{c, a});
                EXPECT_TRUE(allowed.contains(p.signs)) << "seed " << seed << " a " << a;
            }
        }
    }
}

TEST(Crossing, KnownPatterns) {
    // Truncated exponential with rate 1/2 against Exp(1): above, then zero past the atom.
    const auto p = crossing_pattern(fstar_member(0.5).distribution, ScaledExponential{1.0, 1.0});
    EXPECT_EQ(p.signs, (std::vector<int>{1, -1}));
    // Point mass at 1 against Exp(1): above before 1, below after.
    const auto q = crossing_pattern(PiecewiseLinearHazard::dirac(), PiecewiseLinearHazard::exponential());
    EXPECT_EQ(q.signs, (std::vector<int>{1, -1}));
    EXPECT_EQ(q.sign_changes(), 1u);
}

TEST(Crossing, EqualityIntervalsAreFlagged) {
    const PiecewiseLinearHazard f({0.0, 1.0}, {1.0, 2.0});
    const PiecewiseLinearHazard g({0.0, 1.0}, {1.0, 3.0});
    const auto p = crossing_pattern(f, g);
    EXPECT_TRUE(p.equality_interval);
    EXPECT_EQ(p.signs, (std::vector<int>{1}));
}

TEST(Crossing, SingleCrossingOrdersSecondMoments) {
    std::size_t tested = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const auto base = random_ifr(seed, 2 + seed % 6).distribution;
        std::vector<double> rates(base.rates().begin(), base.rates().end());
        // Steepen the tail and renormalize the mean.
        const std::size_t j = seed % rates.size();
        for (std::size_t i = j; i < rates.size(); ++i) rates[i] *= 1.5;
        if (rates.back() == 0.0) continue;
        const std::vector<double> knots(base.knots().begin(), base.knots().end());
        PiecewiseLinearHazard perturbed(knots, rates, base.terminal());
        perturbed = scale(perturbed, 1.0 / mean(perturbed));

        const auto p = crossing_pattern(base, perturbed);
        if (p.sign_changes() != 1 || p.equality_interval) continue;
        ++tested;
        const double m_base = moment_by_quadrature(base, 2.0);
        const double m_pert = moment_by_quadrature(perturbed, 2.0);
        // S_f - S_g going from - to + makes f the more dispersed law.
        if (p.signs.front() < 0) {
            EXPECT_GT(m_base, m_pert) << seed;
        } else {
            EXPECT_LT(m_base, m_pert) << seed;
        }
    }
    EXPECT_GT(tested, 50u);
}

TEST(Suites, SmallCorpusPasses) {
    std::vector<IfrSample> samples;
    for (std::uint64_t seed = 0; seed < 40; ++seed)
        samples.push_back(random_interior_ifr(seed, default_segment_count(seed)));
    const auto results = run_envelope_suites(samples);
    ASSERT_EQ(results.size(), 6u);
    for (const auto& r : results) {
        EXPECT_TRUE(r.passed()) << r.name << " worst margin " << r.worst_margin;
        EXPECT_GT(r.checks, 0u) << r.name;
    }
}

TEST(Suites, DecreasingHazardTripsTheGate) {
    std::vector<IfrSample> samples{random_interior_ifr(3, 4)};
    const PiecewiseLinearHazard dfr({0.0, 0.5}, {2.0, 0.5});
    samples.push_back({999, 2, scale(dfr, 1.0 / mean(dfr)), 0.0});
    samples.back().mu2 = moment(samples.back().distribution, 2.0);
    const auto results = run_envelope_suites(samples);
    const auto gate = std::find_if(results.begin(), results.end(),
                                   [](const SuiteResult& r) { return r.name == "ifr_gate"; });
    ASSERT_NE(gate, results.end());
    EXPECT_FALSE(gate->passed());
    EXPECT_EQ(gate->first_offending_seed, 999u);
}
