#pragma once

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "quamo/quamo.hpp"

namespace quamo::test {

// Test-side sampling is independent of the library's Rng.
inline std::mt19937_64& engine() {
  static std::mt19937_64 e(20240607);
  return e;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine()); }

inline Vec3 random_vec(double scale = 1.0) { return Vec3(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)); }

inline Quaterniond random_unit() {
  std::normal_distribution<double> n;
  Eigen::Vector4d v(n(engine()), n(engine()), n(engine()), n(engine()));
  v.normalize();
  return {v(0), v(1), v(2), v(3)};
}

inline Eigen::Quaterniond to_eigen(const Quaterniond& q) { return Eigen::Quaterniond(q.w, q.x, q.y, q.z); }
inline Quaterniond from_eigen(const Eigen::Quaterniond& q) { return {q.w(), q.x(), q.y(), q.z()}; }

/// Rodrigues oracle: rotation of `angle` about `axis`.
inline Quaterniond rodrigues(const Vec3& axis, double angle) {
  return from_eigen(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
}

inline double max_abs_diff(const Quaterniond& a, const Quaterniond& b) { return (a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff(); }

}  // namespace quamo::test
