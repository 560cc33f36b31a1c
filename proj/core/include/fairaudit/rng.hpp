#pragma once

#include <cstdint>

namespace fairaudit {

// SplitMix64 finalizer. Used both as a mixer and as the core of Rng below.
inline constexpr uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

/// Deterministic generator with explicit substreams.
///
/// <random> distributions are implementation-defined, so every draw here is
/// produced by hand-written, platform-independent arithmetic. A substream is
/// fully determined by (seed, index), which makes resampling results
/// independent of thread scheduling.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  static Rng substream(uint64_t seed, uint64_t index) {
    return Rng(mix64(seed + 0x9E3779B97F4A7C15ULL * (index + 1)) ^ mix64(~index));
  }

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (Lemire's method). n must be > 0.
  uint64_t next_below(uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<uint64_t>(m);
    if (low < n) {
      const uint64_t threshold = (0ULL - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  bool next_bernoulli(double p) { return next_unit() < p; }

 private:
  uint64_t state_;
};

}  // namespace fairaudit
