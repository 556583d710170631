#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "uiq/enumeration.hpp"
#include "uiq/errors.hpp"
#include "uiq/parallel.hpp"
#include "uiq/rng.hpp"

namespace uiq {

// Step law of the spine label chain at level k: +1 w.p. p, −1 w.p. q, 0 w.p. r.
struct BirthDeathParams {
    long k = 1;
    Rational p, q, r;
};

inline BirthDeathParams bd_params(long k) {
    if (k < 1) throw RangeError("bd_params: k must be >= 1");
    const Rational w = w_value(k);
    const Rational dk = d_value(k);
    const Rational base = w * w / (12 * dk);
    BirthDeathParams b;
    b.k = k;
    b.q = base * d_value(k - 1);
    b.r = w * w / 12;
    b.p = base * d_value(k + 1);
    return b;
}

struct StepProbs {
    double p, q, r;
};

inline StepProbs bd_params_real(long k) {
    const double w = w_real(k);
    const double dk = d_real(k);
    const double base = w * w / (12.0 * dk);
    return {base * d_real(k + 1), base * d_real(k - 1), w * w / 12.0};
}

// Cached step thresholds: a uniform u moves down when u < q, stays when
// u < q + r, and moves up otherwise.
class SpineKernel {
public:
    explicit SpineKernel(long max_level = 64) { ensure(max_level); }

    void ensure(long level) {
        if (level < static_cast<long>(down_.size())) return;
        const auto old = static_cast<long>(down_.size());
        const auto size = static_cast<std::size_t>(std::max(level + 1, 2 * old));
        down_.resize(size);
        stay_.resize(size);
        for (long k = std::max(old, 1L); k < static_cast<long>(size); ++k) {
            const StepProbs s = bd_params_real(k);
            down_[static_cast<std::size_t>(k)] = s.q;
            stay_[static_cast<std::size_t>(k)] = s.q + s.r;
        }
    }

    long step(long x, Rng& rng) {
        ensure(x);
        const double u = rng.uniform();
        if (u < down_[static_cast<std::size_t>(x)]) return x - 1;
        if (u < stay_[static_cast<std::size_t>(x)]) return x;
        return x + 1;
    }

private:
    std::vector<double> down_;
    std::vector<double> stay_;
};

struct SpinePath {
    std::vector<Label> states;
    std::uint64_t seed = 0;
};

inline SpinePath sample_spine(long n_steps, std::uint64_t seed) {
    if (n_steps < 0) throw RangeError("sample_spine: n_steps must be >= 0");
    SpinePath path;
    path.seed = seed;
    path.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    Rng rng(seed);
    SpineKernel kernel;
    long x = 1;
    path.states.push_back(1);
    for (long t = 0; t < n_steps; ++t) {
        x = kernel.step(x, rng);
        path.states.push_back(static_cast<Label>(x));
    }
    return path;
}

// ---------------------------------------------------------------------------
// Sojourn times at a level.

enum class SojournMode { exact_series, monte_carlo };

struct SojournEstimate {
    long k = 1;
    double value = 0;
    SojournMode mode = SojournMode::exact_series;
    long terms_or_replicas = 0;
    double error = 0;  // error bound (exact) or standard error (Monte Carlo)
    double censored_fraction = 0;
};

inline constexpr long sojourn_max_terms = 10'000'000;

// E_1[S_k] = Σ_{j≥0} m_{k+1,j} / p_k with m_{k+1,j} = d_k d_{k+1}/(d_{k+j} d_{k+j+1}).
// Terms decay like (1 + j/(k+1))^{-8}, so the tail after the last term m_J is
// bounded by m_J·(k+1+J)/7 up to lower-order corrections.
inline SojournEstimate sojourn_exact(long k, double tol = 1e-12) {
    if (k < 1) throw RangeError("sojourn_exact: k must be >= 1");
    if (!(tol > 0)) throw RangeError("sojourn_exact: tol must be positive");
    const long double lead = static_cast<long double>(d_real(k)) * d_real(k + 1);
    long double sum = 0;
    long double term = 1;
    long j = 0;
    for (;; ++j) {
        if (j >= sojourn_max_terms)
            throw NonConvergenceError("sojourn_exact: series did not converge within 10^7 terms at k=" +
                                      std::to_string(k));
        term = j == 0 ? 1.0L : lead / (static_cast<long double>(d_real(k + j)) * d_real(k + j + 1));
        sum += term;
        if (term < static_cast<long double>(tol) * sum) break;
    }
    const double p = bd_params_real(k).p;
    SojournEstimate e;
    e.k = k;
    e.mode = SojournMode::exact_series;
    e.value = static_cast<double>(sum) / p;
    e.terms_or_replicas = j + 1;
    e.error = static_cast<double>(term * static_cast<long double>(k + 1 + j) / 7.0L) / p;
    return e;
}

// Suffix sums S(m) = Σ_{m'≥m} 1/(d_{m'} d_{m'+1}) for m ≤ k_max give, for all
// levels at once,
//   E_1[S_k] = d_k d_{k+1} S(k) / p_k   and   P_x(reach k) = S(x)/S(k), x > k.
class SojournTable {
public:
    explicit SojournTable(long k_max) : k_max_(k_max) {
        if (k_max < 1) throw RangeError("SojournTable: k_max must be >= 1");
        // Sum far enough that the analytic remainder (56/3)²·M^{-7}/7 is below
        // double resolution relative to S(k_max) ~ k_max^{-7}.
        const long m_far = 40 * k_max + 2000;
        long double s = 0;
        {
            const long double M = static_cast<long double>(m_far + 1);
            s = (56.0L / 3.0L) * (56.0L / 3.0L) / (7.0L * std::pow(M - 0.5L, 7.0L));
        }
        suffix_.assign(static_cast<std::size_t>(k_max) + 2, 0.0L);
        for (long m = m_far; m >= 1; --m) {
            s += 1.0L / (static_cast<long double>(d_real(m)) * d_real(m + 1));
            if (m <= k_max + 1) suffix_[static_cast<std::size_t>(m)] = s;
        }
        value_.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
        for (long k = 1; k <= k_max; ++k)
            value_[static_cast<std::size_t>(k)] = static_cast<double>(
                static_cast<long double>(d_real(k)) * d_real(k + 1) * suffix_[static_cast<std::size_t>(k)] /
                bd_params_real(k).p);
    }

    long k_max() const noexcept { return k_max_; }

    double expected_sojourn(long k) const {
        if (k < 1 || k > k_max_) throw RangeError("SojournTable: level outside table");
        return value_[static_cast<std::size_t>(k)];
    }

    // Probability that the chain started at x ever visits k (1 when x ≤ k).
    double reach_probability(long x, long k) const {
        if (k < 1 || k > k_max_) throw RangeError("SojournTable: level outside table");
        if (x <= k) return 1.0;
        if (x <= k_max_ + 1)
            return static_cast<double>(suffix_[static_cast<std::size_t>(x)] / suffix_[static_cast<std::size_t>(k)]);
        // Beyond the table the suffix sum behaves like (56/3)²/(7 x^7).
        const long double sx = (56.0L / 3.0L) * (56.0L / 3.0L) / (7.0L * std::pow(static_cast<long double>(x) - 0.5L, 7.0L));
        return static_cast<double>(sx / suffix_[static_cast<std::size_t>(k)]);
    }

private:
    long k_max_;
    std::vector<long double> suffix_;
    std::vector<double> value_;
};

struct SojournMcOptions {
    long start = 1;
    long margin = -1;  // default k + 50
    unsigned threads = 0;
    double max_censored = 0.01;
};

// Mean number of visits to level k (time 0 included) over `replicas` paths of
// `horizon` steps. A path is censored when its final state is ≤ k + margin.
inline SojournEstimate sojourn_mc(long k, long replicas, long horizon, std::uint64_t seed,
                                  SojournMcOptions opt = {}) {
    if (k < 1 || replicas < 1 || horizon < 0 || opt.start < 1)
        throw RangeError("sojourn_mc: need k >= 1, replicas >= 1, horizon >= 0, start >= 1");
    const long margin = opt.margin < 0 ? k + 50 : opt.margin;
    struct Outcome {
        long visits = 0;
        bool censored = false;
    };
    const long chunk = 1024;
    const long chunks = (replicas + chunk - 1) / chunk;
    auto results = parallel_map(
        static_cast<std::size_t>(chunks),
        [&](std::size_t c) {
            SpineKernel kernel(opt.start + horizon + 1);
            std::vector<Outcome> out;
            const long lo = static_cast<long>(c) * chunk;
            const long hi = std::min(replicas, lo + chunk);
            for (long i = lo; i < hi; ++i) {
                Rng rng = stream_rng(seed, static_cast<std::uint64_t>(i));
                long x = opt.start;
                Outcome o;
                o.visits = x == k;
                for (long t = 0; t < horizon; ++t) {
                    x = kernel.step(x, rng);
                    o.visits += x == k;
                }
                o.censored = x <= k + margin;
                out.push_back(o);
            }
            return out;
        },
        opt.threads);
    long double sum = 0;
    long double sum2 = 0;
    long censored = 0;
    for (const auto& block : results)
        for (const Outcome& o : block) {
            sum += o.visits;
            sum2 += static_cast<long double>(o.visits) * o.visits;
            censored += o.censored;
        }
    const long double n = static_cast<long double>(replicas);
    const long double mean = sum / n;
    const long double var = replicas > 1 ? (sum2 - n * mean * mean) / (n - 1) : 0.0L;
    SojournEstimate e;
    e.k = k;
    e.mode = SojournMode::monte_carlo;
    e.value = static_cast<double>(mean);
    e.terms_or_replicas = replicas;
    e.error = static_cast<double>(std::sqrt(std::max(0.0L, var) / n));
    e.censored_fraction = static_cast<double>(censored) / static_cast<double>(replicas);
    if (e.censored_fraction > opt.max_censored)
        throw CensoringError("sojourn_mc: censored fraction " + std::to_string(e.censored_fraction) +
                             " exceeds limit; increase the horizon");
    return e;
}

} // namespace uiq
