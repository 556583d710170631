#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "uiq/spine.hpp"

using namespace uiq;

namespace {

// Independent oracle for E_1[S_k]: hitting probabilities h(x) = P_x(hit k
// before L) solve the harmonic equation on (k, L) with h(k)=1, h(L)=0; the
// chain escapes from k with probability p_k (1 − h(k+1)), and the number of
// visits is geometric with that parameter. Starting below k the chain must
// pass through k.
double sojourn_by_absorption(long k, long L) {
    const auto n = static_cast<std::size_t>(L - k - 1);  // unknowns h(k+1..L-1)
    std::vector<long double> a(n), b(n), c(n), rhs(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        const StepProbs s = bd_params_real(k + 1 + static_cast<long>(i));
        a[i] = -s.q;
        b[i] = 1.0L - s.r;
        c[i] = -s.p;
    }
    rhs[0] = bd_params_real(k + 1).q;  // h(k) = 1 moved to the right side
    for (std::size_t i = 1; i < n; ++i) {
        const long double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<long double> h(n);
    h[n - 1] = rhs[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) h[i] = (rhs[i] - c[i] * h[i + 1]) / b[i];
    const double escape = static_cast<double>(bd_params_real(k).p * (1.0L - h[0]));
    return 1.0 / escape;
}

} // namespace

TEST(BdParams, LevelOne) {
    const BirthDeathParams b = bd_params(1);
    EXPECT_EQ(b.p, Rational(23, 27));
    EXPECT_EQ(b.q, 0);
    EXPECT_EQ(b.r, Rational(4, 27));
}

TEST(BdParams, ExactSumAndPositivity) {
    for (long k = 1; k <= 10000; ++k) {
        const BirthDeathParams b = bd_params(k);
        ASSERT_EQ(b.p + b.q + b.r, 1) << k;
        ASSERT_GT(b.p, 0);
        if (k >= 2) {
            ASSERT_GT(b.q, 0);
        }
    }
}

TEST(BdParams, LargeLevelBands) {
    double max_q = 0, max_p = 0, max_r = 0, max_ratio = 0;
    for (long k = 10; k <= 10000; ++k) {
        const BirthDeathParams b = bd_params(k);
        const Rational kk(k);
        const double dq = Rational(kk * kk * (b.q - Rational(1, 3) + Rational(4, 3) / kk)).get_d();
        const double dp = Rational(kk * kk * (b.p - Rational(1, 3) - Rational(4, 3) / kk)).get_d();
        const double dr = Rational(kk * kk * kk * (b.r - Rational(1, 3) * (1 - 4 / (kk * kk)))).get_d();
        const double dratio = Rational(kk * kk * (b.q / b.p - 1 + 8 / kk)).get_d();
        max_q = std::max(max_q, std::abs(dq));
        max_p = std::max(max_p, std::abs(dp));
        max_r = std::max(max_r, std::abs(dr));
        max_ratio = std::max(max_ratio, std::abs(dratio));
    }
    EXPECT_LT(max_q, 10.0);
    EXPECT_LT(max_p, 10.0);
    EXPECT_LT(max_r, 20.0);
    EXPECT_LT(max_ratio, 50.0);
    // k = 10^4 explicitly: q within an O(k^-2) band of 1/3 − 4/(3k).
    const double k = 1e4;
    EXPECT_NEAR(bd_params(10000).q.get_d(), 1.0 / 3 - 4.0 / (3 * k), 10.0 / (k * k));
}

TEST(BdParams, RealMatchesExact) {
    for (long k : {1L, 2L, 3L, 50L, 1000L}) {
        const BirthDeathParams b = bd_params(k);
        const StepProbs s = bd_params_real(k);
        EXPECT_NEAR(s.p, b.p.get_d(), 1e-14);
        EXPECT_NEAR(s.q, b.q.get_d(), 1e-14);
        EXPECT_NEAR(s.r, b.r.get_d(), 1e-14);
    }
}

TEST(SampleSpine, Basics) {
    const SpinePath empty = sample_spine(0, 7);
    ASSERT_EQ(empty.states.size(), 1u);
    EXPECT_EQ(empty.states[0], 1);
    const SpinePath path = sample_spine(20000, 11);
    ASSERT_EQ(path.states.size(), 20001u);
    EXPECT_EQ(path.states[0], 1);
    for (std::size_t t = 1; t < path.states.size(); ++t) {
        ASSERT_GE(path.states[t], 1);
        ASSERT_LE(std::abs(path.states[t] - path.states[t - 1]), 1);
        if (path.states[t - 1] == 1) {
            ASSERT_TRUE(path.states[t] == 1 || path.states[t] == 2);
        }
    }
    EXPECT_EQ(sample_spine(500, 3).states, sample_spine(500, 3).states);
}

TEST(SampleSpine, OneStepFrequenciesFromLevelOne) {
    SpineKernel kernel;
    Rng rng(2024);
    const long n = 1'000'000;
    long up = 0, stay = 0;
    for (long i = 0; i < n; ++i) {
        const long x = kernel.step(1, rng);
        ASSERT_TRUE(x == 1 || x == 2);
        up += x == 2;
        stay += x == 1;
    }
    const double p = 23.0 / 27.0;
    const double se = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(static_cast<double>(up) / n, p, 4 * se);
    EXPECT_NEAR(static_cast<double>(stay) / n, 4.0 / 27.0, 4 * se);
}

TEST(SojournExact, AgreesWithAbsorptionOracle) {
    for (long k : {1L, 2L, 5L, 20L, 50L}) {
        const SojournEstimate e = sojourn_exact(k);
        const double oracle = sojourn_by_absorption(k, 400 * k + 4000);
        EXPECT_NEAR(e.value, oracle, 1e-9 * oracle) << k;
        EXPECT_GE(e.value, 1.0);
    }
    EXPECT_NEAR(sojourn_exact(1).value, 1.25, 1e-9);
}

TEST(SojournExact, ThreeSeventhsLimit) {
    double prev_gap = 1e9;
    for (long k : {100L, 1000L, 10000L}) {
        const SojournEstimate e = sojourn_exact(k);
        const double ratio = e.value / static_cast<double>(k);
        const double gap = std::abs(ratio - 3.0 / 7.0);
        EXPECT_LT(gap, prev_gap) << k;
        EXPECT_LT(e.error, 1e-6 * e.value);
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 0.01);
}

TEST(SojournTable, MatchesSeries) {
    const SojournTable table(300);
    for (long k : {1L, 2L, 10L, 77L, 300L})
        EXPECT_NEAR(table.expected_sojourn(k), sojourn_exact(k).value, 1e-9 * sojourn_exact(k).value) << k;
    EXPECT_DOUBLE_EQ(table.reach_probability(3, 5), 1.0);
    EXPECT_LT(table.reach_probability(11, 5), table.reach_probability(10, 5));
    EXPECT_THROW(table.expected_sojourn(301), RangeError);
}

TEST(SojournMc, LevelOneAtLeastOne) {
    const SojournEstimate e = sojourn_mc(1, 2000, 4000, 5);
    EXPECT_GE(e.value, 1.0);
}

TEST(SojournMc, AgreesWithExactAtFifty) {
    const SojournEstimate mc = sojourn_mc(50, 100000, 20000, 99);
    const SojournEstimate ex = sojourn_exact(50);
    EXPECT_LE(mc.censored_fraction, 0.01);
    EXPECT_NEAR(mc.value, ex.value, 4 * mc.error);
}

TEST(SojournMc, IndependentOfStartBelowLevel) {
    const SojournEstimate from_one = sojourn_mc(20, 20000, 10000, 1, {.start = 1});
    const SojournEstimate from_ten = sojourn_mc(20, 20000, 10000, 2, {.start = 10});
    const SojournEstimate from_twenty = sojourn_mc(20, 20000, 10000, 3, {.start = 20});
    const double se = std::hypot(from_one.error, from_ten.error);
    EXPECT_NEAR(from_one.value, from_ten.value, 4 * se);
    EXPECT_NEAR(from_one.value, from_twenty.value, 4 * std::hypot(from_one.error, from_twenty.error));
    EXPECT_NEAR(from_one.value, sojourn_exact(20).value, 4 * from_one.error);
}

TEST(SojournMc, CensoringShrinksWithHorizon) {
    EXPECT_THROW(sojourn_mc(10, 2000, 50, 4), CensoringError);
    double prev = 2.0;
    for (long horizon : {400L, 1600L, 6400L}) {
        const SojournEstimate e = sojourn_mc(10, 4000, horizon, 4, {.max_censored = 1.0});
        EXPECT_LE(e.censored_fraction, prev);
        prev = e.censored_fraction;
    }
    EXPECT_LT(prev, 0.01);
}

// After exceeding 2k the chain returns to k with probability S(2k+1)/S(k), and
// once there the number of visits is geometric with ratio 1 − 1/E[S_k].
TEST(SojournMc, VisitsAfterExceedingTwiceLevelAreGeometric) {
    const long k = 2;
    const long replicas = 1'000'000;
    const SojournTable table(40);
    SpineKernel kernel(200);
    std::vector<long> at_least(8, 0);  // at_least[n] = #paths with ≥ n visits
    for (long i = 0; i < replicas; ++i) {
        Rng rng = stream_rng(77, static_cast<std::uint64_t>(i));
        long x = 2 * k + 1;
        long visits = 0;
        // From level 24 a return to 2 has probability below 1e-7.
        while (x < 24) {
            x = kernel.step(x, rng);
            visits += x == k;
        }
        for (long n = 1; n < 8 && n <= visits; ++n) ++at_least[static_cast<std::size_t>(n)];
    }
    const double reach = table.reach_probability(2 * k + 1, k);
    const double p1 = static_cast<double>(at_least[1]) / replicas;
    EXPECT_NEAR(p1, reach, 4 * std::sqrt(reach * (1 - reach) / replicas));
    const double ratio = 1.0 - 1.0 / table.expected_sojourn(k);
    for (std::size_t n = 1; n < 4; ++n) {
        const double m = static_cast<double>(at_least[n]);
        const double r = static_cast<double>(at_least[n + 1]) / m;
        EXPECT_NEAR(r, ratio, 4 * std::sqrt(ratio * (1 - ratio) / m)) << n;
    }
}
