#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "uiq/errors.hpp"
#include "uiq/labeled_tree.hpp"

namespace uiq {

using Count = mpz_class;
using Rational = mpq_class;

// Two-argument mpq construction does not reduce; every fraction built from a
// numerator and denominator goes through here.
inline Rational ratio(const Count& num, const Count& den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// Number of well-labeled trees with N edges: 2·3^N·(2N)!/(N!(N+2)!).
inline Count count_well_labeled(long N) {
    if (N < 0) throw RangeError("count_well_labeled: N must be nonnegative");
    const auto n = static_cast<unsigned long>(N);
    Count num;
    Count f;
    mpz_ui_pow_ui(num.get_mpz_t(), 3, n);
    num *= 2;
    mpz_fac_ui(f.get_mpz_t(), 2 * n);
    num *= f;
    Count den;
    mpz_fac_ui(den.get_mpz_t(), n);
    mpz_fac_ui(f.get_mpz_t(), n + 2);
    den *= f;
    mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return num;
}

// Labeled trees with n edges whose labels never approach 0: Cat(n)·3^n.
inline Count unconstrained_count(long n) {
    Count c;
    mpz_bin_uiui(c.get_mpz_t(), 2 * static_cast<unsigned long>(n), static_cast<unsigned long>(n));
    c /= (n + 1);
    Count p;
    mpz_ui_pow_ui(p.get_mpz_t(), 3, static_cast<unsigned long>(n));
    return c * p;
}

// ---------------------------------------------------------------------------
// Closed-form constants.

inline Rational z_value(long k) {
    if (k < 1) throw RangeError("z_value: k must be >= 1");
    return Rational(1, 2) - ratio(1, Count(k) * (k + 3));
}

// w_0 = 0 by convention.
inline Rational w_value(long k) {
    if (k < 0) throw RangeError("w_value: k must be >= 0");
    return ratio(Count(2) * k * (k + 3), Count(k + 1) * (k + 2));
}

// d_0 = 0 by convention.
inline Rational d_value(long k) {
    if (k < 0) throw RangeError("d_value: k must be >= 0");
    const Count K(k);
    const Count poly = 5 * K * K * K * K + 30 * K * K * K + 59 * K * K + 42 * K + 4;
    return ratio(3 * K * (K + 3) * poly, 280 * (K + 1) * (K + 2));
}

inline double w_real(long k) {
    const double x = static_cast<double>(k);
    return 2.0 * x * (x + 3.0) / ((x + 1.0) * (x + 2.0));
}

inline double d_real(long k) {
    const double x = static_cast<double>(k);
    const double poly = (((5.0 * x + 30.0) * x + 59.0) * x + 42.0) * x + 4.0;
    return 3.0 / 280.0 * x * (x + 3.0) / ((x + 1.0) * (x + 2.0)) * poly;
}

// ---------------------------------------------------------------------------
// Count tables.

enum class CountMethod : std::uint8_t { forward = 1, label_recurrence = 2 };

// D[n,k] and E[n,k] for n ≤ n_max, k ≤ k_max. Rows may store fewer than k_max
// labels: both D[n,·] and E[n,·] are constant from label n+1 upward, so a
// lookup with k > n+1 is served by the entry at n+1.
class CountTable {
public:
    CountTable() = default;

    long n_max() const noexcept { return n_max_; }
    long k_max() const noexcept { return k_max_; }
    CountMethod method() const noexcept { return method_; }
    long stored_width(long n) const { return static_cast<long>(rows_.at(static_cast<std::size_t>(n)).d.size()); }

    bool covers(long n, long k) const noexcept {
        if (n < 0 || n > n_max_ || k < 0) return false;
        if (k == 0) return true;
        return resolve(n, k) >= 0;
    }

    const Count& D(long n, long k) const { return lookup(n, k, true); }
    const Count& E(long n, long k) const { return lookup(n, k, false); }

    std::size_t approx_bytes() const {
        std::size_t total = 0;
        for (const Row& r : rows_)
            for (std::size_t i = 0; i < r.d.size(); ++i)
                total += 2 * sizeof(Count) + (mpz_size(r.d[i].get_mpz_t()) + mpz_size(r.e[i].get_mpz_t())) * 8;
        return total;
    }

    void write(std::ostream& os) const;
    static CountTable read(std::istream& is);

    friend CountTable build_count_table(long, long, std::size_t);
    friend CountTable build_count_table_by_label_recurrence(long, long, std::size_t);

private:
    struct Row {
        std::vector<Count> d;  // index = label − 1
        std::vector<Count> e;
    };

    long resolve(long n, long k) const noexcept {
        const long width = static_cast<long>(rows_[static_cast<std::size_t>(n)].d.size());
        if (k > n + 1 && n + 1 <= width) return n;  // saturated: entry at label n+1
        return k <= width ? k - 1 : -1;
    }

    const Count& lookup(long n, long k, bool d) const {
        static const Count zero(0);
        if (n < 0 || n > n_max_) throw RangeError("CountTable: size " + std::to_string(n) + " outside table");
        if (k == 0) return zero;
        if (k < 0) throw RangeError("CountTable: negative label");
        const long idx = resolve(n, k);
        if (idx < 0)
            throw RangeError("CountTable: label " + std::to_string(k) + " at size " + std::to_string(n) +
                             " not covered");
        const Row& r = rows_[static_cast<std::size_t>(n)];
        return d ? r.d[static_cast<std::size_t>(idx)] : r.e[static_cast<std::size_t>(idx)];
    }

    long n_max_ = 0;
    long k_max_ = 0;
    CountMethod method_ = CountMethod::forward;
    std::vector<Row> rows_;
};

inline constexpr std::size_t default_count_budget = std::size_t{4} << 30;

namespace detail {

// Rough size of a triangle of counts growing like 12^n.
inline std::size_t estimate_table_bytes(long n_max, long k_max, bool triangle) {
    double total = 0;
    for (long n = 0; n <= n_max; ++n) {
        const long width = triangle ? std::min(n + 1, k_max + n_max - n) : k_max;
        total += 2.0 * static_cast<double>(width) * (sizeof(Count) + 8.0 + static_cast<double>(n) * 3.585 / 8.0);
    }
    return total > 1e18 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(total);
}

inline void check_args(long n_max, long k_max, std::size_t estimate, std::size_t budget) {
    if (n_max < 0) throw RangeError("count table: n_max must be >= 0");
    if (k_max < 1) throw RangeError("count table: k_max must be >= 1");
    if (estimate > budget)
        throw ResourceLimitError("count table: estimated " + std::to_string(estimate) +
                                 " bytes exceeds budget of " + std::to_string(budget));
}

} // namespace detail

// Forward DP over sizes:
//   E[n,k] = D[n−1,k−1] + D[n−1,k] + D[n−1,k+1],
//   D[n,k] = Σ_{m=1..n} E[m,k]·D[n−m,k],  D[0,k] = 1.
// Row n keeps labels 1..min(n+1, k_max+n_max−n), which is exactly what the
// rows above it and the exposed window k ≤ k_max consume.
inline CountTable build_count_table(long n_max, long k_max, std::size_t budget = default_count_budget) {
    detail::check_args(n_max, k_max, detail::estimate_table_bytes(n_max, k_max, true), budget);
    CountTable t;
    t.n_max_ = n_max;
    t.k_max_ = k_max;
    t.method_ = CountMethod::forward;
    t.rows_.resize(static_cast<std::size_t>(n_max) + 1);
    for (long n = 0; n <= n_max; ++n) {
        const long width = std::min(n + 1, k_max + n_max - n);
        auto& row = t.rows_[static_cast<std::size_t>(n)];
        row.d.resize(static_cast<std::size_t>(width));
        row.e.resize(static_cast<std::size_t>(width));
        // Rows already filled are visible through the accessors while this
        // one is built; the partially sized row itself is never read.
        const long saved_n_max = t.n_max_;
        t.n_max_ = n - 1;
        for (long k = 1; k <= width; ++k) {
            const auto ki = static_cast<std::size_t>(k - 1);
            if (n == 0) {
                row.d[ki] = 1;
                row.e[ki] = 0;
                continue;
            }
            row.e[ki] = t.D(n - 1, k - 1) + t.D(n - 1, k) + t.D(n - 1, k + 1);
            Count acc = row.e[ki];  // m = n term, D[0,k] = 1
            for (long m = 1; m < n; ++m) mpz_addmul(acc.get_mpz_t(), t.E(m, k).get_mpz_t(), t.D(n - m, k).get_mpz_t());
            row.d[ki] = std::move(acc);
        }
        t.n_max_ = saved_n_max;
    }
    return t;
}

// Label-by-label route, cost O(k_max·(n_max+k_max)²) regardless of how large
// n_max is relative to k_max. With W = Σ D[n,k] z^n, the generating function
// of E is 1 − 1/W, and D[n,k+1] = E[n+1,k] − D[n,k] − D[n,k−1].
inline CountTable build_count_table_by_label_recurrence(long n_max, long k_max,
                                                        std::size_t budget = default_count_budget) {
    detail::check_args(n_max, k_max, detail::estimate_table_bytes(n_max, k_max, false), budget);
    CountTable t;
    t.n_max_ = n_max;
    t.k_max_ = k_max;
    t.method_ = CountMethod::label_recurrence;
    t.rows_.resize(static_cast<std::size_t>(n_max) + 1);
    for (auto& row : t.rows_) {
        row.d.resize(static_cast<std::size_t>(k_max));
        row.e.resize(static_cast<std::size_t>(k_max));
    }

    long len = n_max + k_max - 1;  // D[·,k] known for sizes 0..len
    std::vector<Count> prev(static_cast<std::size_t>(len) + 1, 0);  // D[·,k−1]
    std::vector<Count> cur(static_cast<std::size_t>(len) + 1);     // D[·,k]
    cur[0] = 1;
    for (long n = 1; n <= len; ++n) {
        cur[static_cast<std::size_t>(n)] = cur[static_cast<std::size_t>(n - 1)] * (6 * (2 * n - 1));
        mpz_divexact_ui(cur[static_cast<std::size_t>(n)].get_mpz_t(), cur[static_cast<std::size_t>(n)].get_mpz_t(),
                        static_cast<unsigned long>(n + 2));
    }
    std::vector<Count> inv;
    for (long k = 1; k <= k_max; ++k) {
        inv.assign(static_cast<std::size_t>(len) + 1, 0);
        inv[0] = 1;
        for (long n = 1; n <= len; ++n) {
            Count acc = 0;
            for (long m = 1; m <= n; ++m)
                mpz_addmul(acc.get_mpz_t(), cur[static_cast<std::size_t>(m)].get_mpz_t(),
                           inv[static_cast<std::size_t>(n - m)].get_mpz_t());
            inv[static_cast<std::size_t>(n)] = -acc;
        }
        for (long n = 0; n <= n_max; ++n) {
            auto& row = t.rows_[static_cast<std::size_t>(n)];
            row.d[static_cast<std::size_t>(k - 1)] = cur[static_cast<std::size_t>(n)];
            row.e[static_cast<std::size_t>(k - 1)] = n == 0 ? Count(0) : Count(-inv[static_cast<std::size_t>(n)]);
        }
        if (k == k_max) break;
        std::vector<Count> next(static_cast<std::size_t>(len));
        for (long n = 0; n < len; ++n)
            next[static_cast<std::size_t>(n)] = -inv[static_cast<std::size_t>(n + 1)] - cur[static_cast<std::size_t>(n)] -
                                                prev[static_cast<std::size_t>(n)];
        --len;
        prev = std::move(cur);
        prev.resize(static_cast<std::size_t>(len) + 1);
        cur = std::move(next);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Binary cache: "ULTC1", u8 method, u64 n_max, u64 k_max, then per row n a u64
// width followed by width D entries and width E entries; each entry is a u32
// byte length and the little-endian magnitude (all counts are nonnegative).

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b.data(), 8);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b.data(), 4);
}

inline std::uint64_t get_uint(std::istream& is, int bytes) {
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), bytes);
    if (!is) throw FormatError("count cache: truncated file");
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}

inline void put_count(std::ostream& os, const Count& c) {
    if (sgn(c) < 0) throw FormatError("count cache: negative entry");
    std::size_t len = 0;
    std::vector<char> buf((mpz_sizeinbase(c.get_mpz_t(), 2) + 7) / 8 + 1);
    mpz_export(buf.data(), &len, -1, 1, -1, 0, c.get_mpz_t());
    put_u32(os, static_cast<std::uint32_t>(len));
    os.write(buf.data(), static_cast<std::streamsize>(len));
}

inline Count get_count(std::istream& is) {
    const auto len = static_cast<std::size_t>(get_uint(is, 4));
    std::vector<char> buf(len);
    is.read(buf.data(), static_cast<std::streamsize>(len));
    if (!is) throw FormatError("count cache: truncated entry");
    Count c;
    mpz_import(c.get_mpz_t(), len, -1, 1, -1, 0, buf.data());
    return c;
}

} // namespace detail

inline void CountTable::write(std::ostream& os) const {
    os.write("ULTC1", 5);
    os.put(static_cast<char>(method_));
    detail::put_u64(os, static_cast<std::uint64_t>(n_max_));
    detail::put_u64(os, static_cast<std::uint64_t>(k_max_));
    for (const Row& r : rows_) {
        detail::put_u64(os, r.d.size());
        for (const Count& c : r.d) detail::put_count(os, c);
        for (const Count& c : r.e) detail::put_count(os, c);
    }
}

inline CountTable CountTable::read(std::istream& is) {
    std::array<char, 5> magic{};
    is.read(magic.data(), 5);
    if (!is || std::memcmp(magic.data(), "ULTC1", 5) != 0) throw FormatError("count cache: bad magic");
    CountTable t;
    const int m = is.get();
    if (m != 1 && m != 2) throw FormatError("count cache: unknown method tag");
    t.method_ = static_cast<CountMethod>(m);
    t.n_max_ = static_cast<long>(detail::get_uint(is, 8));
    t.k_max_ = static_cast<long>(detail::get_uint(is, 8));
    t.rows_.resize(static_cast<std::size_t>(t.n_max_) + 1);
    for (Row& r : t.rows_) {
        const auto width = static_cast<std::size_t>(detail::get_uint(is, 8));
        if (width > static_cast<std::size_t>(t.k_max_ + t.n_max_ + 1)) throw FormatError("count cache: row too wide");
        r.d.resize(width);
        r.e.resize(width);
        for (Count& c : r.d) c = detail::get_count(is);
        for (Count& c : r.e) c = detail::get_count(is);
    }
    return t;
}

// Loads the table from `dir` when a cache file for (n_max, k_max, method)
// exists, otherwise builds it and writes the file. An empty `dir` disables
// the cache.
inline CountTable cached_count_table(const std::filesystem::path& dir, long n_max, long k_max,
                                     CountMethod method = CountMethod::forward,
                                     std::size_t budget = default_count_budget) {
    auto build = [&] {
        return method == CountMethod::forward ? build_count_table(n_max, k_max, budget)
                                              : build_count_table_by_label_recurrence(n_max, k_max, budget);
    };
    if (dir.empty()) return build();
    const auto file = dir / ("counts_" + std::string(method == CountMethod::forward ? "fwd" : "lab") + "_n" +
                             std::to_string(n_max) + "_k" + std::to_string(k_max) + ".ultc");
    if (std::ifstream in{file, std::ios::binary}) {
        CountTable t = CountTable::read(in);
        if (t.n_max() == n_max && t.k_max() == k_max && t.method() == method) return t;
    }
    CountTable t = build();
    std::filesystem::create_directories(dir);
    const auto tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        t.write(out);
        if (!out) throw FormatError("count cache: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, file);
    return t;
}

// D[N,k]/D[N,1], evaluated from the exact quotient.
inline double d_ratio(const CountTable& table, long k, long N) {
    if (!table.covers(N, k) || !table.covers(N, 1))
        throw RangeError("d_ratio: table does not cover (" + std::to_string(N) + "," + std::to_string(k) + ")");
    return ratio(table.D(N, k), table.D(N, 1)).get_d();
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration.

// Calls fn(parent, label) for every k-labeled tree with N edges. Vertices are
// numbered in preorder; parent[0] = -1. Each tree is produced exactly once:
// vertex i attaches to some vertex on the rightmost path of vertices 0..i−1.
inline void for_each_k_labeled_tree_raw(long N, Label k,
                                        const std::function<void(const std::vector<int>&, const std::vector<Label>&)>& fn) {
    if (N < 0 || k < 1) throw RangeError("enumeration: need N >= 0 and k >= 1");
    const auto n = static_cast<std::size_t>(N);
    std::vector<int> parent(n + 1, -1);
    std::vector<Label> label(n + 1, k);
    std::vector<int> path{0};
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i > n) {
            fn(parent, label);
            return;
        }
        const std::vector<int> saved = path;
        for (std::size_t depth = 0; depth < saved.size(); ++depth) {
            const int p = saved[depth];
            parent[i] = p;
            path.assign(saved.begin(), saved.begin() + static_cast<std::ptrdiff_t>(depth) + 1);
            path.push_back(static_cast<int>(i));
            for (int delta = -1; delta <= 1; ++delta) {
                const Label l = label[static_cast<std::size_t>(p)] + delta;
                if (l < 1) continue;
                label[i] = l;
                rec(i + 1);
            }
        }
        path = saved;
    };
    rec(1);
}

inline LabeledTree tree_from_preorder(const std::vector<int>& parent, const std::vector<Label>& label) {
    LabeledTree t(label[0]);
    for (std::size_t i = 1; i < parent.size(); ++i) t.add_child(parent[i], label[i]);
    return t;
}

inline void for_each_k_labeled_tree(long N, Label k, const std::function<void(const LabeledTree&)>& fn) {
    for_each_k_labeled_tree_raw(N, k, [&](const std::vector<int>& p, const std::vector<Label>& l) {
        fn(tree_from_preorder(p, l));
    });
}

inline constexpr long brute_force_max_edges = 7;

inline Count count_k_labeled_brute(long N, Label k) {
    if (N > brute_force_max_edges)
        throw RangeError("count_k_labeled_brute: N above " + std::to_string(brute_force_max_edges));
    unsigned long count = 0;
    for_each_k_labeled_tree_raw(N, k, [&](const std::vector<int>&, const std::vector<Label>&) { ++count; });
    return Count(count);
}

} // namespace uiq
