#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include <Eigen/Core>

#include "quamo/error.hpp"

namespace quamo {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

using Vec3 = Vector3<double>;
using Mat3 = Matrix3<double>;
using Mat4 = Matrix4<double>;

namespace detail {
inline std::uint64_t& normalize_counter() {
  thread_local std::uint64_t count = 0;
  return count;
}
}  // namespace detail

/// Number of Quaternion::normalized() calls made on this thread. Lets tests
/// prove an integrator never renormalizes.
inline std::uint64_t normalize_call_count() { return detail::normalize_counter(); }

/// Quaternion stored scalar-first: q = w + x i + y j + z k.
template <typename Scalar>
struct Quaternion {
  Scalar w{1};
  Scalar x{0};
  Scalar y{0};
  Scalar z{0};

  constexpr Quaternion() = default;
  constexpr Quaternion(Scalar w_, Scalar x_, Scalar y_, Scalar z_) : w{w_}, x{x_}, y{y_}, z{z_} {}
  Quaternion(Scalar w_, const Vector3<Scalar>& v) : w{w_}, x{v.x()}, y{v.y()}, z{v.z()} {}

  static constexpr Quaternion identity() { return {}; }

  Vector3<Scalar> vec() const { return {x, y, z}; }
  Eigen::Matrix<Scalar, 4, 1> coeffs() const { return {w, x, y, z}; }

  Scalar squared_norm() const { return w * w + x * x + y * y + z * z; }
  Scalar norm() const { return std::sqrt(squared_norm()); }

  Quaternion normalized() const {
    ++detail::normalize_counter();
    const Scalar n = norm();
    if (!(n > Scalar(0))) {
      throw DomainError("cannot normalize a zero quaternion");
    }
    return {w / n, x / n, y / n, z / n};
  }

  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  Quaternion operator+(const Quaternion& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
  Quaternion operator-(const Quaternion& o) const { return {w - o.w, x - o.x, y - o.y, z - o.z}; }
  Quaternion operator*(Scalar s) const { return {w * s, x * s, y * s, z * s}; }

  bool operator==(const Quaternion&) const = default;
};

using Quaterniond = Quaternion<double>;

template <typename Scalar>
Scalar dot(const Quaternion<Scalar>& p, const Quaternion<Scalar>& q) {
  return p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z;
}

template <typename Scalar>
Quaternion<Scalar> conjugate(const Quaternion<Scalar>& q) {
  return {q.w, -q.x, -q.y, -q.z};
}

template <typename Scalar>
Vector3<Scalar> vec(const Quaternion<Scalar>& q) {
  return q.vec();
}

/// Hamilton product: (p0 q0 - p.q, p0 q + q0 p + p x q).
template <typename Scalar>
Quaternion<Scalar> hamilton(const Quaternion<Scalar>& p, const Quaternion<Scalar>& q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
          p.w * q.x + q.w * p.x + p.y * q.z - p.z * q.y,
          p.w * q.y + q.w * p.y + p.z * q.x - p.x * q.z,
          p.w * q.z + q.w * p.z + p.x * q.y - p.y * q.x};
}

template <typename Scalar>
Quaternion<Scalar> operator*(const Quaternion<Scalar>& p, const Quaternion<Scalar>& q) {
  return hamilton(p, q);
}

/// Returns q or -q, whichever has a non-negative inner product with `reference`.
template <typename Scalar>
Quaternion<Scalar> canonicalize(const Quaternion<Scalar>& q, const Quaternion<Scalar>& reference) {
  return dot(q, reference) < Scalar(0) ? -q : q;
}

template <typename Scalar>
bool is_unit(const Quaternion<Scalar>& q, Scalar tolerance) {
  return std::abs(q.norm() - Scalar(1)) <= tolerance;
}

template <typename Scalar>
void require_unit(const Quaternion<Scalar>& q, const char* what, Scalar tolerance = Scalar(1e-6)) {
  if (!is_unit(q, tolerance)) {
    std::ostringstream msg;
    msg << what << ": quaternion (" << q.w << ", " << q.x << ", " << q.y << ", " << q.z
        << ") is off the unit sphere (norm " << q.norm() << ")";
    throw DomainError(msg.str());
  }
}

template <typename Scalar>
struct AxisAngle {
  Vector3<Scalar> axis{Scalar(1), Scalar(0), Scalar(0)};
  Scalar angle{0};
};

using AxisAngled = AxisAngle<double>;

/// Below this rotation angle the axis is undefined and reported as +x.
inline constexpr double kSmallAngle = 1e-8;

template <typename Scalar>
Quaternion<Scalar> from_axis_angle(const AxisAngle<Scalar>& a) {
  const Scalar half = a.angle / Scalar(2);
  return Quaternion<Scalar>(std::cos(half), a.axis * std::sin(half));
}

template <typename Scalar>
Quaternion<Scalar> from_axis_angle(const Vector3<Scalar>& axis, Scalar angle) {
  return from_axis_angle(AxisAngle<Scalar>{axis, angle});
}

/// Canonical form: angle in [0, pi].
template <typename Scalar>
AxisAngle<Scalar> to_axis_angle(const Quaternion<Scalar>& q_in) {
  const Quaternion<Scalar> q = q_in.w < Scalar(0) ? -q_in : q_in;
  const Vector3<Scalar> v = q.vec();
  const Scalar s = v.norm();
  const Scalar angle = Scalar(2) * std::atan2(s, q.w);
  if (angle < Scalar(kSmallAngle)) {
    return {};
  }
  return {v / s, angle};
}

/// Rotation vector (axis * angle, angle in [0, pi]) of a unit quaternion.
template <typename Scalar>
Vector3<Scalar> log_map(const Quaternion<Scalar>& q_in) {
  const Quaternion<Scalar> q = q_in.w < Scalar(0) ? -q_in : q_in;
  const Vector3<Scalar> v = q.vec();
  const Scalar s = v.norm();
  if (s < Scalar(kSmallAngle) / Scalar(2)) {
    // atan2(s, w) / s -> 1 / w as s -> 0
    return v * (Scalar(2) / q.w);
  }
  return v * (Scalar(2) * std::atan2(s, q.w) / s);
}

/// Inverse of log_map.
template <typename Scalar>
Quaternion<Scalar> exp_map(const Vector3<Scalar>& rotation_vector) {
  const Scalar angle = rotation_vector.norm();
  if (angle < Scalar(kSmallAngle)) {
    const Scalar half = angle / Scalar(2);
    return Quaternion<Scalar>(Scalar(1) - half * half / Scalar(2), rotation_vector / Scalar(2));
  }
  return from_axis_angle<Scalar>(rotation_vector / angle, angle);
}

template <typename Scalar>
Matrix3<Scalar> skew(const Vector3<Scalar>& w) {
  Matrix3<Scalar> m;
  m << Scalar(0), -w.z(), w.y(),
       w.z(), Scalar(0), -w.x(),
       -w.y(), w.x(), Scalar(0);
  return m;
}

/// Rotation matrix of a unit quaternion.
template <typename Scalar>
Matrix3<Scalar> to_rotation_matrix(const Quaternion<Scalar>& q) {
  const Scalar ww = q.w * q.w, xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
  const Scalar xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
  const Scalar wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
  Matrix3<Scalar> r;
  r << ww + xx - yy - zz, Scalar(2) * (xy - wz), Scalar(2) * (xz + wy),
       Scalar(2) * (xy + wz), ww - xx + yy - zz, Scalar(2) * (yz - wx),
       Scalar(2) * (xz - wy), Scalar(2) * (yz + wx), ww - xx - yy + zz;
  return r;
}

/// Vector part of q (x) (0, v) (x) q*.
template <typename Scalar>
Vector3<Scalar> rotate(const Quaternion<Scalar>& q, const Vector3<Scalar>& v) {
  const Vector3<Scalar> u = q.vec();
  const Vector3<Scalar> t = Scalar(2) * u.cross(v);
  return v + q.w * t + u.cross(t);
}

/// Geodesic rotation angle between two unit quaternions, in [0, pi].
///
/// Equal to 2 acos(|<p, q>|) but evaluated through atan2 of the relative
/// rotation, which keeps full precision near zero.
template <typename Scalar>
Scalar geodesic_angle(const Quaternion<Scalar>& p, const Quaternion<Scalar>& q) {
  require_unit(p, "geodesic_angle");
  require_unit(q, "geodesic_angle");
  const Quaternion<Scalar> rel = hamilton(p, conjugate(q));
  return Scalar(2) * std::atan2(rel.vec().norm(), std::abs(rel.w));
}

/// The 4x4 QDE generator, block layout [[-[w]x, w], [-w^T, 0]].
///
/// The matrix acts on vector-first coordinates (x, y, z, w); use
/// qde_derivative() to apply it to a scalar-first Quaternion.
template <typename Scalar>
Matrix4<Scalar> omega_matrix(const Vector3<Scalar>& w) {
  Matrix4<Scalar> m = Matrix4<Scalar>::Zero();
  m.template topLeftCorner<3, 3>() = -skew(w);
  m.template topRightCorner<3, 1>() = w;
  m.template bottomLeftCorner<1, 3>() = -w.transpose();
  return m;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> to_vector_first(const Quaternion<Scalar>& q) {
  return {q.x, q.y, q.z, q.w};
}

template <typename Scalar>
Quaternion<Scalar> from_vector_first(const Eigen::Matrix<Scalar, 4, 1>& v) {
  return {v(3), v(0), v(1), v(2)};
}

/// q_dot = 1/2 Omega(w) q, with the storage permutation applied.
/// Algebraically this is 1/2 q (x) (0, w).
template <typename Scalar>
Quaternion<Scalar> qde_derivative(const Quaternion<Scalar>& q, const Vector3<Scalar>& w) {
  const Eigen::Matrix<Scalar, 4, 1> d = Scalar(0.5) * (omega_matrix(w) * to_vector_first(q));
  return from_vector_first<Scalar>(d);
}

// ---------------------------------------------------------------------------
// Euler angles

enum class EulerSequence { XYZ, ZXY };

inline const char* to_string(EulerSequence s) { return s == EulerSequence::XYZ ? "XYZ" : "ZXY"; }

/// Intrinsic Euler angles. angles(i) is the rotation about the i-th axis of the
/// sequence, wrapped to [0, 2 pi).
template <typename Scalar>
struct EulerAngles {
  EulerSequence sequence{EulerSequence::XYZ};
  Vector3<Scalar> angles{Vector3<Scalar>::Zero()};
  bool gimbal_locked{false};
};

using EulerAnglesd = EulerAngles<double>;

template <typename Scalar>
Scalar wrap_two_pi(Scalar angle) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar a = std::fmod(angle, two_pi);
  if (a < Scalar(0)) a += two_pi;
  if (a >= two_pi) a = Scalar(0);
  return a;
}

template <typename Scalar>
Vector3<Scalar> wrap_two_pi(const Vector3<Scalar>& v) {
  return {wrap_two_pi(v.x()), wrap_two_pi(v.y()), wrap_two_pi(v.z())};
}

namespace detail {
template <typename Scalar>
Quaternion<Scalar> elementary(int axis, Scalar angle) {
  Vector3<Scalar> e = Vector3<Scalar>::Zero();
  e(axis) = Scalar(1);
  return from_axis_angle<Scalar>(e, angle);
}

inline constexpr double kGimbalCosine = 1e-9;
}  // namespace detail

template <typename Scalar>
Quaternion<Scalar> from_euler(const EulerAngles<Scalar>& e) {
  const auto& a = e.angles;
  switch (e.sequence) {
    case EulerSequence::XYZ:
      return detail::elementary(0, a(0)) * detail::elementary(1, a(1)) * detail::elementary(2, a(2));
    case EulerSequence::ZXY:
      return detail::elementary(2, a(0)) * detail::elementary(0, a(1)) * detail::elementary(1, a(2));
  }
  return {};
}

/// At gimbal lock the third angle is set to zero and the result is flagged.
template <typename Scalar>
EulerAngles<Scalar> to_euler(const Quaternion<Scalar>& q, EulerSequence sequence) {
  const Matrix3<Scalar> r = to_rotation_matrix(q);
  EulerAngles<Scalar> out;
  out.sequence = sequence;
  Scalar first{}, middle{}, last{};
  if (sequence == EulerSequence::XYZ) {
    // R = Rx(a) Ry(b) Rz(c); R(0,2) = sin b
    const Scalar cos_middle = std::hypot(r(0, 0), r(0, 1));
    middle = std::atan2(r(0, 2), cos_middle);
    if (cos_middle < Scalar(detail::kGimbalCosine)) {
      out.gimbal_locked = true;
      first = std::atan2(r(2, 1), r(1, 1));
      last = Scalar(0);
    } else {
      first = std::atan2(-r(1, 2), r(2, 2));
      last = std::atan2(-r(0, 1), r(0, 0));
    }
  } else {
    // R = Rz(a) Rx(b) Ry(c); R(2,1) = sin b
    const Scalar cos_middle = std::hypot(r(2, 0), r(2, 2));
    middle = std::atan2(r(2, 1), cos_middle);
    if (cos_middle < Scalar(detail::kGimbalCosine)) {
      out.gimbal_locked = true;
      first = std::atan2(r(1, 0), r(0, 0));
      last = Scalar(0);
    } else {
      first = std::atan2(-r(0, 1), r(1, 1));
      last = std::atan2(-r(2, 0), r(2, 2));
    }
  }
  out.angles = wrap_two_pi(Vector3<Scalar>(first, middle, last));
  return out;
}

}  // namespace quamo
