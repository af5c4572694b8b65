#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace goalrl {

/// SplitMix64 finalizer. Bijective 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

/// Derive an independent 64-bit key from a parent seed and a stream index.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ULL));
}

/// Counter-based random stream.
///
/// Draw k of a stream is a pure function of (key, k), so a stream can be
/// recreated at any position from its (seed, counter) pair and streams for
/// different path indices never share state. Satisfies
/// UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream() = default;
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t counter = 0) noexcept
        : key_(derive_seed(seed, stream)), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next_u64(); }

    result_type next_u64() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t uniform_index(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; always consumes exactly two counters.
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_ = derive_seed(0, 0);
    std::uint64_t counter_ = 0;
};

}  // namespace goalrl
