#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "uiq/enumeration.hpp"

using namespace uiq;

namespace {

// Independent oracle for D_N: product form of the closed formula, built from
// small integers only.
Count closed_form_by_product(long N) {
    Rational r(2);
    for (long i = 1; i <= N; ++i) r *= 3;
    // (2N)!/(N!(N+2)!) = Π_{i=1..N} (N+i) / ((N+1)(N+2)·N!)
    for (long i = 1; i <= N; ++i) {
        r *= ratio(N + i, i);
    }
    r /= (N + 1) * (N + 2);
    EXPECT_EQ(r.get_den(), 1);
    return r.get_num();
}

// Σ over compositions N = N_1 + … + N_m of Π E[N_i,k].
Count composition_sum(const CountTable& t, long N, long k) {
    if (N == 0) return 1;
    Count total = 0;
    for (long first = 1; first <= N; ++first) total += t.E(first, k) * composition_sum(t, N - first, k);
    return total;
}

} // namespace

TEST(CountWellLabeled, SmallValues) {
    EXPECT_EQ(count_well_labeled(0), 1);
    EXPECT_EQ(count_well_labeled(1), 2);
    EXPECT_EQ(count_well_labeled(2), 9);
    EXPECT_EQ(count_well_labeled(3), 54);
    EXPECT_EQ(count_k_labeled_brute(3, 1), 54);
}

TEST(CountWellLabeled, MatchesProductForm) {
    for (long N = 0; N <= 60; ++N) EXPECT_EQ(count_well_labeled(N), closed_form_by_product(N)) << N;
}

TEST(Brute, Examples) {
    EXPECT_EQ(count_k_labeled_brute(1, 1), 2);
    EXPECT_EQ(count_k_labeled_brute(2, 1), 9);
    for (Label k = 1; k <= 5; ++k) EXPECT_EQ(count_k_labeled_brute(0, k), 1);
    EXPECT_THROW(count_k_labeled_brute(8, 1), RangeError);
}

TEST(Brute, EnumeratedTreesAreValidAndDistinct) {
    std::set<std::string> seen;
    for_each_k_labeled_tree(4, 2, [&](const LabeledTree& t) {
        EXPECT_EQ(t.violation(), "");
        EXPECT_EQ(t.edge_count(), 4u);
        EXPECT_EQ(t.root_label(), 2);
        EXPECT_TRUE(seen.insert(t.to_nested()).second);
    });
    EXPECT_EQ(Count(static_cast<unsigned long>(seen.size())), count_k_labeled_brute(4, 2));
}

TEST(CountTable, AgreesWithBruteForce) {
    const CountTable t = build_count_table(7, 4);
    for (long N = 0; N <= 7; ++N)
        for (Label k = 1; k <= 4; ++k) EXPECT_EQ(t.D(N, k), count_k_labeled_brute(N, k)) << N << "," << k;
}

TEST(CountTable, FirstColumnIsClosedForm) {
    const CountTable t = build_count_table(120, 1);
    for (long N = 0; N <= 120; ++N) EXPECT_EQ(t.D(N, 1), count_well_labeled(N)) << N;
}

TEST(CountTable, SingleEdgeRow) {
    const CountTable t = build_count_table(4, 6);
    EXPECT_EQ(t.D(1, 1), 2);
    EXPECT_EQ(t.E(1, 1), 2);
    for (long k = 2; k <= 6; ++k) {
        EXPECT_EQ(t.D(1, k), 3);
        EXPECT_EQ(t.E(1, k), 3);
    }
    for (long k = 1; k <= 6; ++k) {
        EXPECT_EQ(t.D(0, k), 1);
        EXPECT_EQ(t.E(0, k), 0);
    }
}

TEST(CountTable, SecondColumnSmallValues) {
    const CountTable t = build_count_table(4, 2);
    const long expected[] = {1, 3, 17, 119, 932};
    for (long N = 0; N <= 4; ++N) EXPECT_EQ(t.D(N, 2), expected[N]);
}

TEST(CountTable, Sandwich) {
    const CountTable t = build_count_table(40, 6);
    for (long N = 1; N <= 40; ++N)
        for (long k = 1; k <= 6; ++k) {
            if (N - k + 1 >= 0) {
                EXPECT_LE(count_well_labeled(N - k + 1), t.D(N, k));
            }
            EXPECT_LE(t.D(N, k), count_well_labeled(N + k - 1));
        }
}

TEST(CountTable, ConvolutionAndEdgeIdentities) {
    const CountTable t = build_count_table(12, 5);
    for (long k = 1; k <= 5; ++k)
        for (long N = 0; N <= 12; ++N) {
            EXPECT_EQ(t.D(N, k), composition_sum(t, N, k)) << N << "," << k;
            if (N >= 1) {
                EXPECT_EQ(t.E(N, k), t.D(N - 1, k - 1) + t.D(N - 1, k) + t.D(N - 1, k + 1));
            }
        }
}

TEST(CountTable, SaturatesAtLargeLabels) {
    const CountTable t = build_count_table(10, 20);
    for (long n = 0; n <= 10; ++n)
        for (long k = n + 1; k <= 20; ++k) EXPECT_EQ(t.D(n, k), unconstrained_count(n)) << n << "," << k;
}

TEST(CountTable, LabelRecurrenceMatchesForward) {
    const CountTable f = build_count_table(60, 9);
    const CountTable r = build_count_table_by_label_recurrence(60, 9);
    for (long n = 0; n <= 60; ++n)
        for (long k = 1; k <= 9; ++k) {
            EXPECT_EQ(f.D(n, k), r.D(n, k)) << n << "," << k;
            EXPECT_EQ(f.E(n, k), r.E(n, k)) << n << "," << k;
        }
}

TEST(CountTable, RangeErrors) {
    const CountTable t = build_count_table(5, 2);
    EXPECT_THROW(t.D(6, 1), RangeError);
    EXPECT_THROW(t.D(5, 3), RangeError);
    EXPECT_FALSE(t.covers(5, 3));
    EXPECT_TRUE(t.covers(5, 2));
    EXPECT_THROW(build_count_table(2000, 1, std::size_t{1} << 20), ResourceLimitError);
}

TEST(CountTable, CacheRoundTrip) {
    const CountTable t = build_count_table(30, 4);
    std::stringstream ss;
    t.write(ss);
    EXPECT_EQ(ss.str().substr(0, 5), "ULTC1");
    const CountTable u = CountTable::read(ss);
    EXPECT_EQ(u.n_max(), 30);
    EXPECT_EQ(u.k_max(), 4);
    for (long n = 0; n <= 30; ++n)
        for (long k = 1; k <= 4; ++k) {
            EXPECT_EQ(t.D(n, k), u.D(n, k));
            EXPECT_EQ(t.E(n, k), u.E(n, k));
        }
    std::stringstream bad("ULTC2xxxx");
    EXPECT_THROW(CountTable::read(bad), FormatError);
}

TEST(CountTable, CachedFileIsReused) {
    const auto dir = std::filesystem::temp_directory_path() / "uiq_test_cache";
    std::filesystem::remove_all(dir);
    const CountTable a = cached_count_table(dir, 25, 3);
    EXPECT_TRUE(std::filesystem::exists(dir / "counts_fwd_n25_k3.ultc"));
    const CountTable b = cached_count_table(dir, 25, 3);
    EXPECT_EQ(a.D(25, 3), b.D(25, 3));
    std::filesystem::remove_all(dir);
}

TEST(Constants, Examples) {
    EXPECT_EQ(z_value(1), Rational(1, 4));
    EXPECT_EQ(w_value(1), Rational(4, 3));
    EXPECT_EQ(w_value(2), Rational(5, 3));
    EXPECT_EQ(w_value(0), 0);
    EXPECT_EQ(d_value(0), 0);
    EXPECT_EQ(d_value(1), 1);
    EXPECT_EQ(d_value(2), Rational(23, 4));
    EXPECT_EQ(d_value(1) + d_value(2), 12 * d_value(1) / (w_value(1) * w_value(1)));
}

TEST(Constants, ZIncreasesTowardOneHalf) {
    for (long k = 1; k < 500; ++k) {
        EXPECT_LT(z_value(k), z_value(k + 1));
        EXPECT_LT(z_value(k), Rational(1, 2));
    }
    EXPECT_LT(Rational(1, 2) - z_value(1000), Rational(1, 1000000));
}

TEST(Constants, ExactIdentitiesUpToTenThousand) {
    Rational dm = d_value(0), d = d_value(1);
    for (long k = 1; k <= 10000; ++k) {
        const Rational w = w_value(k);
        EXPECT_EQ(w, 1 / (1 - z_value(k)));
        const Rational dp = d_value(k + 1);
        ASSERT_EQ(dm + d + dp, 12 * d / (w * w)) << k;
        ASSERT_EQ((w_value(k - 1) + w + w_value(k + 1)) / 12 + 1 / w, 1) << k;
        dm = d;
        d = dp;
    }
}

TEST(Constants, RealVersionsMatchExact) {
    for (long k : {0L, 1L, 2L, 7L, 100L, 10000L}) {
        EXPECT_NEAR(w_real(k), w_value(k).get_d(), 1e-15);
        EXPECT_NEAR(d_real(k) / std::max(1.0, d_value(k).get_d()), d_value(k).get_d() / std::max(1.0, d_value(k).get_d()),
                    1e-13);
    }
}

TEST(DRatio, BasicsAndConvergence) {
    const CountTable t = build_count_table_by_label_recurrence(400, 3);
    for (long N : {1L, 10L, 400L}) EXPECT_DOUBLE_EQ(d_ratio(t, 1, N), 1.0);
    double prev_gap = 1e9;
    for (long N : {25L, 50L, 100L, 200L, 400L}) {
        const double r = d_ratio(t, 2, N);
        const double gap = std::abs(r - 5.75);
        EXPECT_LT(gap, prev_gap) << N;
        EXPECT_LT(r, 5.75);
        prev_gap = gap;
        for (long k = 2; k <= 3; ++k) {
            const double lo = ratio(count_well_labeled(N - k + 1), count_well_labeled(N)).get_d();
            const double hi = ratio(count_well_labeled(N + k - 1), count_well_labeled(N)).get_d();
            EXPECT_GE(d_ratio(t, k, N), lo);
            EXPECT_LE(d_ratio(t, k, N), hi);
        }
    }
    EXPECT_THROW(d_ratio(t, 4, 10), RangeError);
}
