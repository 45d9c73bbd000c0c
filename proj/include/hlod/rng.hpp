#pragma once

#include <cstdint>

namespace hlod {

/// SplitMix64: the fixed, portable generator used for all random coefficient
/// fields. 64-bit state, one additive constant, two xor-shift-multiply
/// finalization steps. Identical output on every platform for a given seed,
/// so generated fields are bit-reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

 private:
  uint64_t state_;
};

/// Derives an independent substream seed: one SplitMix64 scramble of
/// seed + stream * golden-ratio increment.
inline uint64_t substream_seed(uint64_t seed, uint64_t stream) {
  SplitMix64 rng(seed + stream * 0x9E3779B97F4A7C15ull);
  return rng.next();
}

}  // namespace hlod
