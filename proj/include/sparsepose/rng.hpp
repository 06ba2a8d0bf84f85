#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sparsepose {

/// SplitMix64 stream (Steele, Lea & Flood). All randomness in the project
/// flows through this generator so outputs are identical across platforms
/// and standard libraries; std::*_distribution is implementation-defined
/// and is not used anywhere.
///
/// Stream splitting: split(i) seeds a child from mix(state ^ mix(i + 1)),
/// so per-item streams depend only on (parent seed, item index).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  SplitMix64 split(std::uint64_t index) const { return SplitMix64(mix(state_ ^ mix(index + 1))); }

  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cosine branch only, one draw per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Normal(0, stddev) rejected outside +-2 stddev.
  double truncated_normal(double stddev) {
    for (;;) {
      const double z = normal();
      if (z >= -2.0 && z <= 2.0) return z * stddev;
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace sparsepose
