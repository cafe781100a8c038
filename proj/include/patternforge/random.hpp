#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>

namespace patternforge {

namespace detail {

// SplitMix64 step; also used standalone as a 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t &x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

/// Anything that can hand out i.i.d. uniform(0,1) and standard normal draws.
/// Generators are templated on this so tests can script exact deviates.
template <typename T>
concept variate_source = requires(T s) {
    { s.uniform() } -> std::same_as<double>;
    { s.normal() } -> std::same_as<double>;
};

/// Deterministic stream of uniform and normal deviates.
///
/// The engine is xoshiro256++ seeded through SplitMix64, with uniforms built
/// from the top 53 bits and normals via Box-Muller. The draw sequence is a
/// pure function of (seed, stream), independent of platform and standard
/// library, which is what makes bags reproducible under any parallel
/// schedule: each pattern owns the stream keyed by its ordinal.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {
        std::uint64_t x = seed ^ detail::mix64(0x9E3779B97F4A7C15ULL * (stream + 1));
        for (auto &w : state_)
            w = detail::splitmix64(x);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0)
            state_[0] = 0x9E3779B97F4A7C15ULL; // all-zero state is a fixed point
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() {
        const std::uint64_t result =
            detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal deviate (Box-Muller, spare value cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0x1.0p-100)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    std::array<std::uint64_t, 4> state_{};
    std::uint64_t seed_;
    std::uint64_t stream_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

static_assert(variate_source<RandomSource>);

} // namespace patternforge
