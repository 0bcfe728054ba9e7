#pragma once

#include <cstdint>

namespace dbdp {

// SplitMix64 finalizer; bijective avalanche mix.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Derive an independent stream seed from a master seed and up to three
/// identifiers (e.g. time-step index, iteration index). Stateless, so
/// substreams for distinct id tuples can be created concurrently.
inline constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a = 0,
                                             std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed ^ kGolden);
    h = mix64(h ^ mix64(a + kGolden));
    h = mix64(h ^ mix64(b + 2 * kGolden));
    h = mix64(h ^ mix64(c + 3 * kGolden));
    return h;
}

// Counter-based PRNG: state advances by a fixed increment, output is the
// mixed counter. Reproducible and seekable; no wall clock or OS entropy.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

    /// Uniform double in [0, 1 - 2^-53]; callers clamp to the open interval.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

  private:
    std::uint64_t state_;
};

} // namespace dbdp
