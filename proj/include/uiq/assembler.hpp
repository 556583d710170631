#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uiq/branches.hpp"
#include "uiq/enumeration.hpp"
#include "uiq/errors.hpp"
#include "uiq/labeled_tree.hpp"
#include "uiq/parallel.hpp"
#include "uiq/rng.hpp"
#include "uiq/spine.hpp"

namespace uiq {

// ---------------------------------------------------------------------------
// Exact discrete choice.

// Picks i with C_{i−1} ≤ x·total < C_i, C_i = w_0 + … + w_i, for x uniform on
// [0,1). x is revealed 64 bits at a time starting from `first_bits` (its top
// 53 bits), so the decision is exact whatever the magnitudes.
inline std::size_t exact_pick(const std::vector<Count>& w, const Count& total, std::uint64_t first_bits, Rng& rng) {
    std::vector<Count> cum(w.size());
    Count run = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        run += w[i];
        cum[i] = run;
    }
    if (run != total) throw StructureError("exact_pick: weights do not sum to total");
    Count a(static_cast<unsigned long>(first_bits));
    unsigned long bits = 53;
    for (;;) {
        // lo = a·total, hi = (a+1)·total; compare against C_i·2^bits.
        const Count lo = a * total;
        const Count hi = lo + total;
        Count scaled;
        std::size_t i = 0;
        for (; i < cum.size(); ++i) {
            mpz_mul_2exp(scaled.get_mpz_t(), cum[i].get_mpz_t(), bits);
            if (lo < scaled) break;
        }
        if (i == cum.size()) throw StructureError("exact_pick: uniform outside [0,1)");
        if (hi <= scaled) return i;
        mpz_mul_2exp(a.get_mpz_t(), a.get_mpz_t(), 64);
        a += Count(static_cast<unsigned long>(rng.next_u64()));
        bits += 64;
    }
}

namespace detail {

inline long double to_ld(const Count& c) {
    long exp = 0;
    const double m = mpz_get_d_2exp(&exp, c.get_mpz_t());
    return std::ldexp(static_cast<long double>(m), static_cast<int>(exp));
}

// Ratio of two counts without overflowing the exponent range.
inline double count_ratio(const Count& num, const Count& den) {
    if (sgn(num) == 0) return 0.0;
    long en = 0, ed = 0;
    const double mn = mpz_get_d_2exp(&en, num.get_mpz_t());
    const double md = mpz_get_d_2exp(&ed, den.get_mpz_t());
    return std::ldexp(mn / md, static_cast<int>(en - ed));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Exact uniform finite trees.

// Uniform k-labeled tree with n edges, built by the root-subtree decomposition
//   D[n,k] = Σ_M E[M,k]·D[n−M,k],  E[M,k] = Σ_ε D[M−1,k+ε]:
// the first root subtree has M edges w.p. E[M,k]D[n−M,k]/D[n,k], its top edge
// leads to label k+ε w.p. D[M−1,k+ε]/E[M,k], and the remaining n−M edges form
// the rest of the root's children. Choices are made in double precision and
// re-decided exactly whenever the uniform lands within `margin` of a boundary.
class FiniteUniformSampler {
public:
    explicit FiniteUniformSampler(const CountTable& table, std::size_t cache_limit = 20'000'000)
        : table_(&table), cache_limit_(cache_limit) {}

    const CountTable& table() const noexcept { return *table_; }

    LabeledTree sample(long n, Label root_label, Rng& rng) { return grow(n, root_label, rng, -1); }

    // Law of ball_of_tree(sample(n, k), r): subtrees below depth r are never
    // expanded.
    LabeledTree sample_ball(long n, long r, Label root_label, Rng& rng) { return grow(n, root_label, rng, r); }

    long exact_fallbacks() const noexcept { return fallbacks_; }

private:
    static constexpr double margin = 1e-11;

    LabeledTree grow(long n, Label root_label, Rng& rng, long radius) {
        if (n < 0 || root_label < 1) throw RangeError("finite sampler: need n >= 0 and root label >= 1");
        if (!table_->covers(n, root_label)) throw RangeError("finite sampler: table does not cover the request");
        LabeledTree tree(root_label);
        struct Task {
            VertexId v;
            long n;
        };
        std::vector<Task> stack{{tree.root(), n}};
        while (!stack.empty()) {
            const Task task = stack.back();
            stack.pop_back();
            if (task.n == 0) continue;
            if (radius >= 0 && tree.depth(task.v) >= radius) continue;
            const long k = tree.label(task.v);
            const long m = pick_size(task.n, k, rng);
            const Label child = static_cast<Label>(pick_label(m, k, rng));
            const VertexId c = tree.add_child(task.v, child);
            stack.push_back({task.v, task.n - m});
            stack.push_back({c, m - 1});
        }
        return tree;
    }

    const std::vector<double>& size_cdf(long n, long k) {
        const auto key = std::make_pair(n, k);
        if (auto it = cdf_.find(key); it != cdf_.end()) return it->second;
        std::vector<double> cdf(static_cast<std::size_t>(n));
        long double acc = 0;
        const Count& total = table_->D(n, k);
        for (long m = 1; m <= n; ++m) {
            acc += detail::count_ratio(table_->E(m, k) * table_->D(n - m, k), total);
            cdf[static_cast<std::size_t>(m - 1)] = static_cast<double>(acc);
        }
        if (cached_ + cdf.size() > cache_limit_) {
            scratch_ = std::move(cdf);
            return scratch_;
        }
        cached_ += cdf.size();
        return cdf_.emplace(key, std::move(cdf)).first->second;
    }

    long pick_size(long n, long k, Rng& rng) {
        const std::uint64_t bits = rng.next_u64() >> 11;
        const double u = static_cast<double>(bits) * 0x1.0p-53;
        const std::vector<double>& cdf = size_cdf(n, k);
        const auto i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const bool near = i == cdf.size() || cdf[i] - u < margin || (i > 0 && u - cdf[i - 1] < margin);
        if (!near) return static_cast<long>(i) + 1;
        ++fallbacks_;
        std::vector<Count> w(static_cast<std::size_t>(n));
        for (long m = 1; m <= n; ++m) w[static_cast<std::size_t>(m - 1)] = table_->E(m, k) * table_->D(n - m, k);
        return static_cast<long>(exact_pick(w, table_->D(n, k), bits, rng)) + 1;
    }

    long pick_label(long m, long k, Rng& rng) {
        const std::uint64_t bits = rng.next_u64() >> 11;
        const double u = static_cast<double>(bits) * 0x1.0p-53;
        const Count& total = table_->E(m, k);
        double acc = 0;
        long chosen = 0;
        bool near = false;
        for (long e = -1; e <= 1; ++e) {
            if (k + e < 1) continue;
            acc += detail::count_ratio(table_->D(m - 1, k + e), total);
            if (std::abs(acc - u) < margin) near = true;
            if (chosen == 0 && u < acc) chosen = k + e;
        }
        if (chosen == 0) chosen = k + 1;
        if (!near) return chosen;
        ++fallbacks_;
        std::vector<Count> w;
        std::vector<long> labels;
        for (long e = -1; e <= 1; ++e) {
            if (k + e < 1) continue;
            w.push_back(table_->D(m - 1, k + e));
            labels.push_back(k + e);
        }
        return labels[exact_pick(w, total, bits, rng)];
    }

    const CountTable* table_;
    std::size_t cache_limit_;
    std::size_t cached_ = 0;
    std::map<std::pair<long, long>, std::vector<double>> cdf_;
    std::vector<double> scratch_;
    long fallbacks_ = 0;
};

// Uniform well-labeled tree (root label 1) with N edges.
inline LabeledTree sample_finite_uniform(long N, std::uint64_t seed, const CountTable& table) {
    FiniteUniformSampler sampler(table);
    Rng rng(seed);
    return sampler.sample(N, 1, rng);
}

// ---------------------------------------------------------------------------
// Cylinder measures.

// Limit probability that the radius-r ball equals `ball` (of height exactly
// r, root label k): 12^{−|ball|} Σ_t (d_{k_t}/d_k) Π_{s≠t} w_{k_s} over the
// labels k_1..k_R at depth r.
inline Rational cylinder_measure(const LabeledTree& ball, int r) {
    if (ball.height() != r) throw RangeError("cylinder_measure: tree height " + std::to_string(ball.height()) +
                                             " differs from r = " + std::to_string(r));
    std::vector<long> rim;
    for (VertexId v = 0; v < static_cast<VertexId>(ball.vertex_count()); ++v)
        if (ball.depth(v) == r) rim.push_back(ball.label(v));
    Count p12;
    mpz_ui_pow_ui(p12.get_mpz_t(), 12, static_cast<unsigned long>(ball.edge_count()));
    Rational sum(0);
    for (std::size_t t = 0; t < rim.size(); ++t) {
        Rational term = d_value(rim[t]);
        for (std::size_t s = 0; s < rim.size(); ++s)
            if (s != t) term *= w_value(rim[s]);
        sum += term;
    }
    return sum / d_value(ball.root_label()) / p12;
}

struct CylinderRow {
    long N = 0;
    long replicas = 0;
    long hits = 0;
    double frequency = 0;
    double std_error = 0;
    double target = 0;
    double gap = 0;  // frequency − target
};

// Fraction of uniform size-N trees whose radius-r ball equals `pattern`
// (r = pattern height), for each N in the grid. `table` must cover every N
// with labels up to root + r; a label-recurrence table is built when absent.
inline std::vector<CylinderRow> empirical_cylinder_check(const std::vector<long>& n_grid, const LabeledTree& pattern,
                                                         const std::vector<long>& replicas, std::uint64_t seed,
                                                         const CountTable* table = nullptr, unsigned threads = 0) {
    if (replicas.size() != n_grid.size() && replicas.size() != 1)
        throw RangeError("empirical_cylinder_check: replicas must be a single value or one per N");
    const int r = pattern.height();
    const double target = cylinder_measure(pattern, r).get_d();
    const std::string key = pattern.to_nested();
    std::unique_ptr<CountTable> owned;
    if (!table) {
        const long n_max = n_grid.empty() ? 0 : *std::max_element(n_grid.begin(), n_grid.end());
        owned = std::make_unique<CountTable>(
            build_count_table_by_label_recurrence(n_max, pattern.root_label() + r + 1));
        table = owned.get();
    }
    std::vector<CylinderRow> rows;
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        const long N = n_grid[g];
        const long reps = replicas.size() == 1 ? replicas[0] : replicas[g];
        CylinderRow row;
        row.N = N;
        row.replicas = reps;
        row.target = target;
        if (static_cast<long>(pattern.edge_count()) <= N) {
            const long chunk = 8192;
            const long chunks = (reps + chunk - 1) / chunk;
            auto hits = parallel_map(
                static_cast<std::size_t>(chunks),
                [&](std::size_t c) {
                    FiniteUniformSampler sampler(*table);
                    long h = 0;
                    const long lo = static_cast<long>(c) * chunk;
                    const long hi = std::min(reps, lo + chunk);
                    for (long i = lo; i < hi; ++i) {
                        Rng rng = stream_rng(derive_seed(seed, static_cast<std::uint64_t>(N)), static_cast<std::uint64_t>(i));
                        const LabeledTree ball = sampler.sample_ball(N, r, pattern.root_label(), rng);
                        h += ball.vertex_count() == pattern.vertex_count() && ball.to_nested() == key;
                    }
                    return h;
                },
                threads);
            for (long h : hits) row.hits += h;
        }
        row.frequency = static_cast<double>(row.hits) / static_cast<double>(reps);
        row.std_error = std::sqrt(row.frequency * (1 - row.frequency) / static_cast<double>(reps));
        row.gap = row.frequency - target;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Expected label counts in the infinite tree.

// E_1[S_k] for k ≤ k_cut and G(k,j) for j ≤ j_max, k ≤ k_cut. The kernel is
// solved with the small index as the source row (G is symmetric).
class GrowthTables {
public:
    GrowthTables(long j_max, long k_cut, unsigned threads = 0)
        : j_max_(j_max), k_cut_(k_cut), sojourn_(k_cut),
          kernel_(g_kernel_exact(j_max, std::max(k_cut, j_max) + g_kernel_buffer, threads)) {
        if (j_max < 1 || k_cut < j_max) throw RangeError("GrowthTables: need 1 <= j_max <= k_cut");
    }

    long j_max() const noexcept { return j_max_; }
    long k_cut() const noexcept { return k_cut_; }
    const SojournTable& sojourn() const noexcept { return sojourn_; }
    const GKernel& kernel() const noexcept { return kernel_; }

    double G(long k, long j) const {
        if (j < 1 || j > j_max_ || k < 1 || k > k_cut_) throw RangeError("GrowthTables: G outside coverage");
        return kernel_(j, k);
    }

    // Σ_{k>k_cut} E_1[S_k] G(k,j), extrapolated from the top decade where
    // E_1[S_k] G(k,j) k² is close to constant. A calibrated estimate.
    double tail(long j) const {
        const long lo = std::max(j, k_cut_ / 10);
        long double a = 0;
        for (long k = lo; k <= k_cut_; ++k)
            a += static_cast<long double>(sojourn_.expected_sojourn(k)) * G(k, j) * static_cast<long double>(k) * k;
        a /= static_cast<long double>(k_cut_ - lo + 1);
        return static_cast<double>(a / (static_cast<long double>(k_cut_) + 0.5L));
    }

private:
    long j_max_;
    long k_cut_;
    SojournTable sojourn_;
    GKernel kernel_;
};

struct GrowthEstimate {
    long j = 0;
    long k_cut = 0;
    double value = 0;  // truncated sum over k ≤ k_cut
    double tail = 0;   // estimated remainder 2Σ_{k>k_cut} E_1[S_k] G(k,j)
};

// E[N_j] = 2 Σ_k E_1[S_k] G(k,j) − E_1[S_j], truncated at k_cut.
inline GrowthEstimate synthesize_ENj(const GrowthTables& tables, long j, long k_cut = -1) {
    if (k_cut < 0) k_cut = tables.k_cut();
    if (j < 1 || j > tables.j_max() || k_cut < j || k_cut > tables.k_cut())
        throw RangeError("synthesize_ENj: (j, k_cut) outside table coverage");
    long double s = 0;
    for (long k = k_cut; k >= 1; --k) s += static_cast<long double>(tables.sojourn().expected_sojourn(k)) * tables.G(k, j);
    GrowthEstimate e;
    e.j = j;
    e.k_cut = k_cut;
    e.value = static_cast<double>(2 * s) - tables.sojourn().expected_sojourn(j);
    if (k_cut == tables.k_cut()) {
        e.tail = 2 * tables.tail(j);
    } else {
        long double rest = 0;
        for (long k = k_cut + 1; k <= tables.k_cut(); ++k)
            rest += static_cast<long double>(tables.sojourn().expected_sojourn(k)) * tables.G(k, j);
        e.tail = static_cast<double>(2 * rest) + 2 * tables.tail(j);
    }
    return e;
}

// E[|B_r|] = 1 + Σ_{j≤r} E[N_j] (the extra vertex is the one at distance 0).
inline double expected_ball_volume(const GrowthTables& tables, long r, long k_cut = -1) {
    double v = 1;
    for (long j = 1; j <= r; ++j) v += synthesize_ENj(tables, j, k_cut).value;
    return v;
}

// Expected number of label-j vertices contributed after a truncated spine
// stops at level x (the vertex at level x itself already counted):
//   Σ_k (E_x[S_k] − δ_{kx}) (2G(k,j) − δ_{kj}),
// with E_x[S_k] = E_1[S_k] for k ≥ x and P_x(reach k)·E_1[S_k] below x.
// Levels above the tables' k_cut enter through the extrapolated tail.
inline double missing_label_mass(const GrowthTables& tables, long x, long j) {
    const long K = tables.k_cut();
    const SojournTable& s = tables.sojourn();
    long double total = 0;
    for (long k = std::min(K, std::max(x, 1L)); k >= 1; --k) {
        const long double visits = static_cast<long double>(s.reach_probability(x, k)) * s.expected_sojourn(k) - (k == x);
        total += visits * (2 * tables.G(k, j) - (k == j));
    }
    for (long k = K; k > x; --k) total += static_cast<long double>(s.expected_sojourn(k)) * (2 * tables.G(k, j) - (k == j));
    total += 2 * tables.tail(j);
    return static_cast<double>(total);
}

// The a-priori tail of the truncation: every spine visit above k_cut is
// treated as missing, 2Σ_{k>k_cut} E_1[S_k] G(k,j).
inline double spine_tail_bias(const GrowthTables& tables, long j, long k_cut) {
    return synthesize_ENj(tables, j, k_cut).tail;
}

// ---------------------------------------------------------------------------
// Truncated uniform infinite tree.

struct UitOptions {
    long window_factor = 10;      // stop after this many times k_cut steps above k_cut
    long max_spine_steps = 0;     // 0: 1000·k_cut² + 100000
    long branch_cap = default_branch_cap;
};

struct LabelHistogram {
    std::vector<std::uint64_t> counts;  // counts[j], j = 1..j_max (index 0 unused)
    std::vector<double> bias_bound;     // expected label-j mass not captured
    long j_max = 0;
};

// Spine e_0..e_n with labels X_0..X_n and two branches per spine vertex. The
// branch roots coincide with the spine vertex.
struct TruncatedUIT {
    SpinePath spine;
    std::vector<LabeledTree> left, right;
    long k_cut = 0;
    long completeness_labels = 0;
    std::vector<double> bias_bound;  // index j ≤ completeness_labels

    // One finite tree: at e_t the children are the right branch's root
    // children, then e_{t+1}, then the left branch's root children. A contour
    // from the root corner therefore climbs the right side first.
    LabeledTree assemble(std::vector<VertexId>* spine_ids = nullptr) const {
        LabeledTree out(spine.states.at(0));
        std::vector<VertexId> ids{out.root()};
        auto graft = [&out](const LabeledTree& branch, VertexId at) {
            std::vector<std::pair<VertexId, VertexId>> stack;
            for (VertexId c = branch.first_child(branch.root()); c != no_vertex; c = branch.next_sibling(c))
                stack.emplace_back(c, out.add_child(at, branch.label(c)));
            while (!stack.empty()) {
                auto [src, dst] = stack.back();
                stack.pop_back();
                for (VertexId c = branch.first_child(src); c != no_vertex; c = branch.next_sibling(c))
                    stack.emplace_back(c, out.add_child(dst, branch.label(c)));
            }
        };
        for (std::size_t t = 0; t < spine.states.size(); ++t) {
            graft(right[t], ids[t]);
            if (t + 1 < spine.states.size()) ids.push_back(out.add_child(ids[t], spine.states[t + 1]));
            graft(left[t], ids[t]);
        }
        if (spine_ids) *spine_ids = ids;
        return out;
    }
};

namespace detail {

// Runs the spine until it has spent window_factor·k_cut consecutive steps
// above k_cut; calls on_vertex(t, label, left_rng, right_rng) for every spine
// vertex. Branch generators are per (vertex, side) streams of the seed.
template <class OnVertex>
SpinePath run_truncated_spine(long k_cut, std::uint64_t seed, const UitOptions& opt, OnVertex&& on_vertex) {
    const long window = opt.window_factor * k_cut;
    const long budget = opt.max_spine_steps > 0 ? opt.max_spine_steps : 1000 * k_cut * k_cut + 100000;
    Rng master(seed);
    Rng spine_rng = master.split(0);
    SpineKernel kernel(2 * k_cut + 64);
    SpinePath path;
    path.seed = seed;
    long x = 1;
    long above = 0;
    for (long t = 0;; ++t) {
        path.states.push_back(static_cast<Label>(x));
        Rng l = master.split(1 + 2 * static_cast<std::uint64_t>(t));
        Rng r = master.split(2 + 2 * static_cast<std::uint64_t>(t));
        on_vertex(t, x, l, r);
        above = x > k_cut ? above + 1 : 0;
        if (above >= window) break;
        if (t >= budget)
            throw HorizonExceededError("sample_uit: spine did not clear k_cut within " + std::to_string(budget) +
                                       " steps");
        x = kernel.step(x, spine_rng);
    }
    return path;
}

inline std::vector<double> truncation_bias(const GrowthTables* tables, long x_final, long j_target) {
    std::vector<double> bias(static_cast<std::size_t>(j_target) + 1, 0.0);
    if (!tables) return bias;
    for (long j = 1; j <= j_target; ++j) bias[static_cast<std::size_t>(j)] = missing_label_mass(*tables, x_final, j);
    return bias;
}

} // namespace detail

// Spine from label 1 with branch pairs grafted at every spine vertex, stopped
// once the spine has stayed above k_cut for window_factor·k_cut steps. When
// `tables` is given, bias_bound[j] is the expected label-j mass that the
// stopped object is still missing given its final spine label.
inline TruncatedUIT sample_uit(long j_target, long k_cut, std::uint64_t seed, const GrowthTables* tables = nullptr,
                               const UitOptions& opt = {}) {
    if (j_target < 1 || k_cut <= j_target) throw RangeError("sample_uit: need 1 <= j_target < k_cut");
    if (tables && tables->j_max() < j_target) throw RangeError("sample_uit: tables do not cover j_target");
    TruncatedUIT uit;
    uit.k_cut = k_cut;
    uit.completeness_labels = j_target;
    BranchKernel kernel(2 * k_cut + 64);
    uit.spine = detail::run_truncated_spine(k_cut, seed, opt, [&](long, long x, Rng& l, Rng& r) {
        uit.left.push_back(sample_branch(x, l, opt.branch_cap, &kernel));
        uit.right.push_back(sample_branch(x, r, opt.branch_cap, &kernel));
    });
    uit.bias_bound = detail::truncation_bias(tables, uit.spine.states.back(), j_target);
    return uit;
}

// All labels, no completeness claim: counts[j] over spine and branches with
// each spine vertex counted once.
inline std::vector<std::uint64_t> full_label_counts(const TruncatedUIT& t) {
    std::vector<std::uint64_t> counts;
    auto add = [&counts](const LabeledTree& b) {
        const auto c = b.label_counts();
        if (c.size() > counts.size()) counts.resize(c.size(), 0);
        for (std::size_t j = 0; j < c.size(); ++j) counts[j] += c[j];
    };
    for (std::size_t i = 0; i < t.left.size(); ++i) {
        add(t.left[i]);
        add(t.right[i]);
        --counts[static_cast<std::size_t>(t.spine.states[i])];
    }
    return counts;
}

inline LabelHistogram label_histogram(const TruncatedUIT& t, long j_max) {
    if (j_max < 1 || j_max > t.completeness_labels)
        throw RangeError("label_histogram: j_max beyond the completeness range " + std::to_string(t.completeness_labels));
    LabelHistogram h;
    h.j_max = j_max;
    auto all = full_label_counts(t);
    all.resize(static_cast<std::size_t>(j_max) + 1, 0);
    h.counts.assign(all.begin(), all.begin() + j_max + 1);
    h.counts[0] = 0;
    h.bias_bound.assign(static_cast<std::size_t>(j_max) + 1, 0.0);
    for (long j = 1; j <= j_max && static_cast<std::size_t>(j) < t.bias_bound.size(); ++j)
        h.bias_bound[static_cast<std::size_t>(j)] = t.bias_bound[static_cast<std::size_t>(j)];
    return h;
}

// label_histogram(sample_uit(j_target, k_cut, seed, tables), j_target) without
// materializing the trees (same random streams, same result).
inline LabelHistogram uit_label_histogram(long j_target, long k_cut, std::uint64_t seed,
                                          const GrowthTables* tables = nullptr, const UitOptions& opt = {}) {
    if (j_target < 1 || k_cut <= j_target) throw RangeError("uit_label_histogram: need 1 <= j_target < k_cut");
    BranchKernel kernel(2 * k_cut + 64);
    std::vector<std::uint64_t> counts;
    const SpinePath path = detail::run_truncated_spine(k_cut, seed, opt, [&](long, long x, Rng& l, Rng& r) {
        branch_label_counts(x, l, counts, opt.branch_cap, &kernel);
        branch_label_counts(x, r, counts, opt.branch_cap, &kernel);
        --counts[static_cast<std::size_t>(x)];
    });
    LabelHistogram h;
    h.j_max = j_target;
    counts.resize(std::max(counts.size(), static_cast<std::size_t>(j_target) + 1), 0);
    h.counts.assign(counts.begin(), counts.begin() + j_target + 1);
    h.counts[0] = 0;
    h.bias_bound = detail::truncation_bias(tables, path.states.back(), j_target);
    return h;
}

struct HistogramSummary {
    std::vector<double> mean, std_error, mean_bias;  // index j
    long replicas = 0;
};

inline HistogramSummary uit_histogram_experiment(long j_target, long k_cut, long replicas, std::uint64_t seed,
                                                 const GrowthTables* tables = nullptr, unsigned threads = 0,
                                                 const UitOptions& opt = {}) {
    auto hs = parallel_map(
        static_cast<std::size_t>(replicas),
        [&](std::size_t i) { return uit_label_histogram(j_target, k_cut, derive_seed(seed, i), tables, opt); },
        threads);
    HistogramSummary s;
    s.replicas = replicas;
    const auto J = static_cast<std::size_t>(j_target) + 1;
    s.mean.assign(J, 0.0);
    s.std_error.assign(J, 0.0);
    s.mean_bias.assign(J, 0.0);
    for (std::size_t j = 1; j < J; ++j) {
        long double a = 0, a2 = 0, b = 0;
        for (const LabelHistogram& h : hs) {
            const long double x = static_cast<long double>(h.counts[j]);
            a += x;
            a2 += x * x;
            b += h.bias_bound[j];
        }
        const long double n = static_cast<long double>(replicas);
        const long double m = a / n;
        s.mean[j] = static_cast<double>(m);
        s.std_error[j] = static_cast<double>(std::sqrt(std::max(0.0L, (a2 - n * m * m) / (n - 1)) / n));
        s.mean_bias[j] = static_cast<double>(b / n);
    }
    return s;
}

} // namespace uiq
