#pragma once

// Counter-based random streams. Every sampled pair owns an independent
// xoshiro256** generator derived from (seed, operation name, pair index), so a
// pair's coordinates do not depend on how the index range is split across
// threads, and a run with N pairs is a prefix of a run with N' > N pairs.
//
// Uniform and normal variates are derived by hand rather than through
// <random> distributions, whose output is implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace qimaps {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

class Xoshiro256 {
public:
    explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9E3779B97F4A7C15ULL;
            w = splitmix64(x);
        }
    }

    constexpr std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform on (0, 1].
    double uniform_open0() noexcept { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

    /// Standard normal by Box-Muller (one draw per call; the pair partner is discarded).
    double normal() noexcept {
        const double u1 = uniform_open0();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4]{};
};

/// Root of the streams of one estimator invocation.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::string_view op) noexcept {
    return splitmix64(seed ^ splitmix64(fnv1a(op)));
}

/// Generator for item `index` of the stream rooted at `key`.
inline Xoshiro256 item_rng(std::uint64_t key, std::uint64_t index) noexcept {
    return Xoshiro256(splitmix64(key ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

}  // namespace qimaps
