#pragma once

#include <cstdint>

namespace dimer {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014): a bijective 64-bit avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of independent stream `index` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix64(mix64(master) ^ mix64(index + 0xD1B54A32D192ED03ULL));
}

/// Deterministic, platform-independent random stream: xoshiro256**
/// (Blackman and Vigna) with its state filled by SplitMix64 from the seed.
///
/// Uniform reals and Bernoulli draws are converted here rather than with the
/// <random> distributions, whose algorithms are implementation-defined.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) noexcept
    {
        for (auto& s : state_) {
            seed += 0x9E3779B97F4A7C15ULL;
            s = mix64(seed - 0x9E3779B97F4A7C15ULL);
        }
    }

    std::uint64_t next_u64() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

} // namespace dimer
