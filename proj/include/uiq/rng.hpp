#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace uiq {

// Counter-based generator: output n is a SplitMix64 finalizer applied to
// key + n * golden_gamma. Streams are independent keys derived from a master
// seed, so replica r of a run never depends on how many draws replica r-1 used.
inline constexpr std::string_view rng_algorithm_id = "splitmix64-ctr/v1";

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return mix64(master ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t gamma = 0x9e3779b97f4a7c15ULL;

    explicit constexpr Rng(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return next_u64(); }

    constexpr std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * gamma); }

    // Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), n > 0 (Lemire's nearly-divisionless method).
    std::uint64_t below(std::uint64_t n) noexcept {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Independent generator for sub-stream `stream`.
    constexpr Rng split(std::uint64_t stream) const noexcept { return Rng(derive_seed(key_, stream)); }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

inline Rng stream_rng(std::uint64_t master_seed, std::uint64_t stream) noexcept {
    return Rng(derive_seed(master_seed, stream));
}

} // namespace uiq
