#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace emoc {

// SplitMix64 (Steele/Lea/Flood). Used instead of <random> engines because the
// generated streams must be identical across standard libraries and builds;
// std::normal_distribution gives no such guarantee.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 significant bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

// Independent child seed for (seed, lane). Lanes index channels, sessions and
// similar parallel streams.
inline uint64_t derive_stream_seed(uint64_t seed, uint64_t lane) {
  SplitMix64 g(seed ^ (0xA0761D6478BD642Full * (lane + 1)));
  return g.next();
}

inline uint64_t fnv1a64(std::string_view bytes, uint64_t h = 0xCBF29CE484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Standard normal variates via the Box-Muller transform over SplitMix64.
// Both halves of each pair are consumed, so one stream yields one sequence.
class NormalSampler {
 public:
  explicit NormalSampler(uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = rng_.next_unit();
    } while (u1 <= 0.0);
    const double u2 = rng_.next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  SplitMix64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace emoc
