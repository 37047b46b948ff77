#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mixguide {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seeded random stream. The uniform and normal transforms are implemented
/// here (rather than via std::*_distribution) so that draws are identical
/// across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  /// Independent stream k derived from a base seed. Streams with distinct k
  /// never share engine state.
  static Rng stream(std::uint64_t seed, std::uint64_t k) {
    return Rng(splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (k + 1))));
  }

  /// Uniform draw in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  /// Index drawn from the categorical distribution with the given weights
  /// (assumed to sum to 1; the last index absorbs rounding slack).
  template <typename Vec>
  int categorical(const Vec& weights) {
    const double u = uniform();
    double cum = 0.0;
    const int n = static_cast<int>(weights.size());
    for (int i = 0; i < n; ++i) {
      cum += weights[i];
      if (u < cum) return i;
    }
    return n - 1;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mixguide
