#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace effq {

/// Deterministic 64-bit generator used everywhere randomness is needed.
///
/// Wraps std::mt19937_64 (whose output sequence is fully specified by the
/// standard) and supplies its own sampling primitives, so results are
/// reproducible across platforms and standard-library implementations.
/// Every sampling call consumes a documented number of raw draws:
///   uniform01        - 1 draw
///   uniform_int      - 1 draw (plus vanishingly rare rejections)
///   sample_discrete  - 1 draw
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Unbiased uniform integer in [0,n). n must be >= 1.
  int uniform_int(int n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t bound = max - max % un;
    std::uint64_t x = next_u64();
    while (x >= bound) x = next_u64();
    return static_cast<int>(x % un);
  }

  /// Samples an index from a probability vector via one uniform draw and a
  /// CDF scan. Assumes probs sums to ~1; numerical shortfall falls through
  /// to the last index with positive mass.
  int sample_discrete(std::span<const double> probs) {
    const double u = uniform01();
    double cum = 0.0;
    int last_positive = 0;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
      if (probs[i] > 0.0) last_positive = i;
      cum += probs[i];
      if (u < cum) return i;
    }
    return last_positive;
  }

  /// Derives a decorrelated stream seed from a master seed and a stream
  /// index (splitmix64 finalizer).
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace effq
