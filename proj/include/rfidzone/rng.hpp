#pragma once

#include <cstdint>
#include <initializer_list>

namespace rfidzone {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based random stream. The stream is fully determined by a seed and a
/// key tuple, so independent draws (one per session/tag/antenna/repetition, or
/// one per bootstrap resample) do not depend on iteration order or threading.
/// All derived distributions are implemented here rather than through
/// <random> distributions so the output is identical across standard libraries.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::initializer_list<std::uint64_t> key) noexcept {
        std::uint64_t s = mix64(seed);
        for (std::uint64_t k : key) s = mix64(s ^ mix64(k + 0x632be59bd9b4e019ULL));
        state_ = s;
    }

    std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept {
        // Rejection sampling keeps the distribution exactly uniform.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % bound;
    }

    /// Standard normal draw (Box-Muller, cosine branch only).
    double normal() noexcept;

private:
    std::uint64_t state_;
};

}  // namespace rfidzone
