#pragma once

// Deterministic randomness. The generator is SplitMix64 (Steele, Lea &
// Flood's mix; the java.util.SplittableRandom finalizer) and is fixed on
// purpose: sampled paths, label draws, and Monte Carlo hit counts are
// regression-tested byte for byte. Independent substreams are derived by
// hashing a (seed, tag) pair, so parallel workers never share state.

#include <cstdint>

namespace gasket {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Seed for an independent substream identified by (seed, tag).
inline std::uint64_t fold_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ mix64(tag));
}

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n). Modulo bias is ~n/2^64, irrelevant at our sizes.
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }

    // Uniform in [lo, hi] inclusive.
    std::int64_t next_in(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

  private:
    std::uint64_t state_;
};

}  // namespace gasket
