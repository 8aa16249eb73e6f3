#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "quamo/quaternion.hpp"

namespace quamo {

/// Portable seeded random source.
///
/// Bits come from std::mt19937_64 seeded through std::seed_seq, both of which
/// the standard specifies exactly. The conversions to uniform and normal
/// variates are done here rather than by <random> distributions, whose
/// algorithms differ between standard libraries. Uniform doubles take the top
/// 53 bits; normals use the Box-Muller cosine branch.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t bits() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Uniform direction on the unit sphere.
  Vec3 unit_vector() {
    for (;;) {
      const Vec3 v(normal(), normal(), normal());
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

  /// Uniform unit quaternion (Shoemake).
  Quaterniond unit_quaternion() {
    const double u1 = uniform(), u2 = uniform(), u3 = uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double t2 = 2.0 * std::numbers::pi * u2, t3 = 2.0 * std::numbers::pi * u3;
    return {b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3)};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace quamo
