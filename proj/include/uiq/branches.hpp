#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "uiq/enumeration.hpp"
#include "uiq/errors.hpp"
#include "uiq/labeled_tree.hpp"
#include "uiq/parallel.hpp"
#include "uiq/rng.hpp"

namespace uiq {

// Each trial at a vertex of type ℓ yields a child of type ℓ+1, ℓ−1 or ℓ, or
// stops the sequence.
struct OffspringLaw {
    long label = 1;
    Rational up, down, same, stop;

    Rational mean_offspring() const { return (up + down + same) / stop; }
};

inline OffspringLaw offspring_law(long label) {
    if (label < 1) throw RangeError("offspring_law: label must be >= 1");
    OffspringLaw law;
    law.label = label;
    law.up = w_value(label + 1) / 12;
    law.down = w_value(label - 1) / 12;
    law.same = w_value(label) / 12;
    law.stop = 1 / w_value(label);
    return law;
}

inline Rational expected_branch_size(long label) {
    if (label < 1) throw RangeError("expected_branch_size: label must be >= 1");
    const Count l(label);
    return ratio(3 * l * l + 9 * l - 2, 10);
}

inline constexpr long default_branch_cap = 50'000'000;

// Cumulative trial thresholds per label, extended on demand.
class BranchKernel {
public:
    explicit BranchKernel(long max_label = 64) { ensure(max_label); }

    void ensure(long label) {
        if (label < static_cast<long>(up_.size())) return;
        const auto old = static_cast<long>(up_.size());
        const auto size = static_cast<std::size_t>(std::max(label + 1, 2 * old));
        up_.resize(size);
        down_.resize(size);
        same_.resize(size);
        for (long l = std::max(old, 1L); l < static_cast<long>(size); ++l) {
            const auto i = static_cast<std::size_t>(l);
            up_[i] = w_real(l + 1) / 12.0;
            down_[i] = up_[i] + w_real(l - 1) / 12.0;
            same_[i] = down_[i] + w_real(l) / 12.0;
        }
    }

    // Next trial outcome at type `label`: the child's label, or 0 to stop.
    long trial(long label, Rng& rng) {
        ensure(label + 1);
        const auto i = static_cast<std::size_t>(label);
        const double u = rng.uniform();
        if (u < up_[i]) return label + 1;
        if (u < down_[i]) return label - 1;
        if (u < same_[i]) return label;
        return 0;
    }

private:
    std::vector<double> up_, down_, same_;
};

// Branch tree of root type `label`. Vertices are expanded depth-first from an
// explicit stack; each vertex's children are its trial outcomes in draw order.
inline LabeledTree sample_branch(long label, Rng& rng, long size_cap = default_branch_cap,
                                 BranchKernel* kernel = nullptr) {
    if (label < 1) throw RangeError("sample_branch: label must be >= 1");
    BranchKernel local(label + 2);
    BranchKernel& k = kernel ? *kernel : local;
    LabeledTree tree(static_cast<Label>(label));
    std::vector<VertexId> stack{tree.root()};
    std::vector<VertexId> kids;
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        kids.clear();
        for (long c; (c = k.trial(tree.label(v), rng)) != 0;) {
            if (static_cast<long>(tree.edge_count()) >= size_cap)
                throw CapExceededError("sample_branch: size cap " + std::to_string(size_cap) + " exceeded");
            kids.push_back(tree.add_child(v, static_cast<Label>(c)));
        }
        stack.insert(stack.end(), kids.rbegin(), kids.rend());
    }
    return tree;
}

inline LabeledTree sample_branch(long label, std::uint64_t seed, long size_cap = default_branch_cap) {
    Rng rng(seed);
    return sample_branch(label, rng, size_cap);
}

// Same law as sample_branch, but only the per-label vertex counts are kept:
// counts[l] += number of type-l vertices (counts grows as needed). Returns the
// edge count. Uses the same draws as sample_branch for a given generator state.
inline long branch_label_counts(long label, Rng& rng, std::vector<std::uint64_t>& counts,
                                long size_cap = default_branch_cap, BranchKernel* kernel = nullptr) {
    if (label < 1) throw RangeError("branch_label_counts: label must be >= 1");
    BranchKernel local(label + 2);
    BranchKernel& k = kernel ? *kernel : local;
    long edges = 0;
    std::vector<long> stack{label};
    std::vector<long> kids;
    while (!stack.empty()) {
        const long l = stack.back();
        stack.pop_back();
        if (static_cast<std::size_t>(l) >= counts.size()) counts.resize(static_cast<std::size_t>(l) + 1, 0);
        ++counts[static_cast<std::size_t>(l)];
        kids.clear();
        for (long c; (c = k.trial(l, rng)) != 0;) {
            if (++edges > size_cap)
                throw CapExceededError("branch_label_counts: size cap " + std::to_string(size_cap) + " exceeded");
            kids.push_back(c);
        }
        stack.insert(stack.end(), kids.rbegin(), kids.rend());
    }
    return edges;
}

// ---------------------------------------------------------------------------
// Occurrence kernel G(k,j): expected number of type-j vertices in a branch of
// root type k.

inline Rational psi_plus(long j) {
    if (j < 1) throw RangeError("psi_plus: j must be >= 1");
    const Count J(j);
    return Rational(J * (J + 1) * (J + 2) * (J + 3));
}

// ψ_−(j) = ψ_+(j)·Σ_{m≥j} 1/(m(m+1)²(m+2)²(m+3)²(m+4)). With y = m + 2 the
// summand is y^{-8}(1 + 6y^{-2} + 27y^{-4} + O(y^{-6})), so the remainder
// after explicit terms j..m−1 is the midpoint-rule integral from m − ½ plus
// its first Euler–Maclaurin correction, accurate to a relative O(y^{-4}).
// Explicit summation stops once that residual error is below tol relative to
// the total.
inline double psi_minus(long j, double tol = 1e-15) {
    if (j < 1) throw RangeError("psi_minus: j must be >= 1");
    auto remainder = [](long m) {
        const long double y = static_cast<long double>(m) + 1.5L;
        const long double y2 = y * y;
        const long double y7 = y2 * y2 * y2 * y;
        return (1.0L / 7.0L + 6.0L / (9.0L * y2) + 27.0L / (11.0L * y2 * y2) - 1.0L / (3.0L * y2)) / y7;
    };
    long double sum = 0;
    for (long m = j;; ++m) {
        const long double y = static_cast<long double>(m) + 2.0L;
        const long double rem = remainder(m);
        if (100.0L * rem / (y * y * y * y) < static_cast<long double>(tol) * (sum + rem)) {
            sum += rem;
            break;
        }
        const long double x = static_cast<long double>(m);
        const long double a = (x + 1) * (x + 2) * (x + 3);
        sum += 1.0L / (x * a * a * (x + 4));
    }
    const long double J = static_cast<long double>(j);
    return static_cast<double>(J * (J + 1) * (J + 2) * (J + 3) * sum);
}

// Dense table, rows k = 1..k_max, columns j = 1..j_max.
class GKernel {
public:
    GKernel() = default;
    GKernel(long k_max, long j_max)
        : k_max_(k_max), j_max_(j_max), g_(static_cast<std::size_t>(k_max * j_max), 0.0) {}

    long k_max() const noexcept { return k_max_; }
    long j_max() const noexcept { return j_max_; }
    double residual_norm() const noexcept { return residual_; }
    double max_entry() const { return g_.empty() ? 0.0 : *std::max_element(g_.begin(), g_.end()); }

    double operator()(long k, long j) const {
        if (k < 1 || k > k_max_ || j < 1 || j > j_max_)
            throw RangeError("GKernel: (" + std::to_string(k) + "," + std::to_string(j) + ") outside table");
        return g_[index(k, j)];
    }

    const double* row(long k) const { return g_.data() + index(k, 1); }

    void write_csv(std::ostream& os, const std::string& comment = {}) const {
        if (!comment.empty()) os << "# " << comment << '\n';
        os << "k,j,G\n";
        char buf[64];
        for (long k = 1; k <= k_max_; ++k)
            for (long j = 1; j <= j_max_; ++j) {
                auto res = std::to_chars(buf, buf + sizeof buf, g_[index(k, j)]);
                os << k << ',' << j << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
            }
    }

    friend GKernel g_kernel_exact(long, long, unsigned);

private:
    std::size_t index(long k, long j) const {
        return static_cast<std::size_t>((k - 1) * j_max_ + (j - 1));
    }

    long k_max_ = 0;
    long j_max_ = 0;
    std::vector<double> g_;
    double residual_ = 0;
};

inline constexpr long g_kernel_buffer = 64;

// For each k, solves
//   −(w_j w_{j−1}/12) G_{j−1} + (1 − w_j²/12) G_j − (w_j w_{j+1}/12) G_{j+1} = δ_{kj}
// on 1 ≤ j ≤ j_max (w_0 = 0) with G_{j_max+1} = G_{j_max}·ψ_−(j_max+1)/ψ_−(j_max).
// Rows sum to 4/((j+1)(j+2)) > 0, so elimination without pivoting is stable.
inline GKernel g_kernel_exact(long k_max, long j_max, unsigned threads = 0) {
    if (k_max < 1) throw RangeError("g_kernel_exact: k_max must be >= 1");
    if (j_max < k_max + g_kernel_buffer)
        throw RangeError("g_kernel_exact: j_max must be at least k_max + " + std::to_string(g_kernel_buffer));
    const auto n = static_cast<std::size_t>(j_max);
    std::vector<long double> w(n + 2);
    for (std::size_t j = 0; j < n + 2; ++j) w[j] = w_real(static_cast<long>(j));
    std::vector<long double> lower(n), diag(n), upper(n);  // index j−1
    for (std::size_t j = 1; j <= n; ++j) {
        lower[j - 1] = -w[j] * w[j - 1] / 12.0L;
        diag[j - 1] = 1.0L - w[j] * w[j] / 12.0L;
        upper[j - 1] = -w[j] * w[j + 1] / 12.0L;
    }
    const long double closure =
        static_cast<long double>(psi_minus(j_max + 1)) / static_cast<long double>(psi_minus(j_max));
    diag[n - 1] += upper[n - 1] * closure;

    // The factorization does not depend on k.
    std::vector<long double> cprime(n), denom(n);
    denom[0] = diag[0];
    cprime[0] = upper[0] / denom[0];
    for (std::size_t i = 1; i < n; ++i) {
        denom[i] = diag[i] - lower[i] * cprime[i - 1];
        if (!(denom[i] > 0)) throw StructureError("g_kernel_exact: singular pivot at j=" + std::to_string(i + 1));
        cprime[i] = upper[i] / denom[i];
    }

    GKernel out(k_max, j_max);
    auto residuals = parallel_map(
        static_cast<std::size_t>(k_max),
        [&](std::size_t kk) {
            const std::size_t k = kk + 1;
            std::vector<long double> x(n, 0.0L);
            // Forward sweep: the right-hand side is zero before row k.
            for (std::size_t i = k - 1; i < n; ++i) {
                const long double rhs = (i == k - 1) ? 1.0L : 0.0L;
                const long double prev = i == 0 ? 0.0L : x[i - 1];
                x[i] = (rhs - lower[i] * prev) / denom[i];
            }
            for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime[i] * x[i + 1];
            long double res = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const long double left = i == 0 ? 0.0L : x[i - 1];
                const long double lhs = lower[i] * left + (1.0L - w[i + 1] * w[i + 1] / 12.0L) * x[i] + upper[i] * x[i + 1];
                res = std::max(res, std::abs(lhs - (i == k - 1 ? 1.0L : 0.0L)));
            }
            double* dst = out.g_.data() + out.index(static_cast<long>(k), 1);
            for (std::size_t i = 0; i < n; ++i) {
                if (!(x[i] > 0)) throw StructureError("g_kernel_exact: nonpositive entry");
                dst[i] = static_cast<double>(x[i]);
            }
            return static_cast<double>(res);
        },
        threads);
    out.residual_ = *std::max_element(residuals.begin(), residuals.end());
    return out;
}

struct McEstimate {
    double mean = 0;
    double std_error = 0;
    long replicas = 0;
};

inline McEstimate g_kernel_mc(long k, long j, long replicas, std::uint64_t seed, long size_cap = default_branch_cap,
                              unsigned threads = 0) {
    if (k < 1 || j < 1 || replicas < 1) throw RangeError("g_kernel_mc: need k, j, replicas >= 1");
    const long chunk = 4096;
    const long chunks = (replicas + chunk - 1) / chunk;
    struct Sums {
        long double s = 0, s2 = 0;
    };
    auto parts = parallel_map(
        static_cast<std::size_t>(chunks),
        [&](std::size_t c) {
            BranchKernel kernel(std::max(k, j) + 2);
            std::vector<std::uint64_t> counts;
            Sums sums;
            const long lo = static_cast<long>(c) * chunk;
            const long hi = std::min(replicas, lo + chunk);
            for (long i = lo; i < hi; ++i) {
                Rng rng = stream_rng(seed, static_cast<std::uint64_t>(i));
                counts.assign(static_cast<std::size_t>(j) + 1, 0);
                branch_label_counts(k, rng, counts, size_cap, &kernel);
                const long double x = static_cast<long double>(counts[static_cast<std::size_t>(j)]);
                sums.s += x;
                sums.s2 += x * x;
            }
            return sums;
        },
        threads);
    long double s = 0, s2 = 0;
    for (const Sums& p : parts) {
        s += p.s;
        s2 += p.s2;
    }
    const long double n = static_cast<long double>(replicas);
    const long double mean = s / n;
    const long double var = replicas > 1 ? (s2 - n * mean * mean) / (n - 1) : 0.0L;
    return {static_cast<double>(mean), static_cast<double>(std::sqrt(std::max(0.0L, var) / n)), replicas};
}

} // namespace uiq
