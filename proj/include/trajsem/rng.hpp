#pragma once

#include <cstdint>

namespace trajsem {

/**
 * Deterministic counter-splittable random stream.
 *
 * All randomness in the library flows from one user seed; independent
 * streams are derived by hashing (seed, stream ids) with SplitMix64.
 * Stream derivation is order-free, so work items can run on any thread
 * without changing their draws.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    // SplitMix64 step (Steele, Lea, Flood 2014).
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

/// Derives a child seed from a root seed and up to two stream indices.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  Rng mix(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL));
  mix.next_u64();
  return mix.next_u64();
}

}  // namespace trajsem
