#pragma once

// Counter-based random numbers: Philox2x64-10. Each simulated path owns a
// substream keyed by its global index, so sequential and parallel runs draw
// identical numbers and a run is reproducible from (seed, path index) alone.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace vollab::rng {

struct Philox2x64 {
    static constexpr std::uint64_t multiplier = 0xD2B74407B1CE6E93ULL;
    static constexpr std::uint64_t key_increment = 0x9E3779B97F4A7C15ULL;

    /// One 128-bit block for (key, counter).
    static std::pair<std::uint64_t, std::uint64_t> block(std::uint64_t key,
                                                         std::uint64_t ctr_hi,
                                                         std::uint64_t ctr_lo) {
        std::uint64_t x0 = ctr_hi, x1 = ctr_lo, k = key;
        for (int round = 0; round < 10; ++round) {
            const unsigned __int128 prod =
                static_cast<unsigned __int128>(multiplier) * x0;
            const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
            const std::uint64_t lo = static_cast<std::uint64_t>(prod);
            x0 = hi ^ k ^ x1;
            x1 = lo;
            k += key_increment;
        }
        return {x0, x1};
    }
};

/// SplitMix64 step; used to mix (seed, task/draw/cell ids) into stream keys.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(seed ^ mix64(a)) ^ mix64(b));
}

/// Standard normal draws for one path substream, Box-Muller on Philox blocks.
class NormalStream {
public:
    NormalStream(std::uint64_t key, std::uint64_t path_index)
        : key_(key), path_(path_index) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const auto [a, b] = Philox2x64::block(key_, block_index_++, path_);
        const double u1 = to_unit(a);  // in (0, 1]
        const double u2 = to_unit(b);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static double to_unit(std::uint64_t x) {
        return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
    }

    std::uint64_t key_;
    std::uint64_t path_;
    std::uint64_t block_index_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Uniform draw on [lo, hi) from the stream keyed by (key, stream, index).
inline double uniform(std::uint64_t key, std::uint64_t stream, std::uint64_t index,
                      double lo, double hi) {
    const auto [a, b] = Philox2x64::block(key, index, stream);
    (void)b;
    const double u = static_cast<double>(a >> 11) * 0x1.0p-53;  // in [0, 1)
    return lo + (hi - lo) * u;
}

}  // namespace vollab::rng
