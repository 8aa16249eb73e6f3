#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "quamo/quaternion.hpp"

namespace quamo {

/// Which side the angular-velocity increment multiplies on.
enum class Frame {
  world,  ///< q' = dq (x) q
  body,   ///< q' = q (x) dq
};

enum class IntegratorKind { exact_s3, approx_renorm, euler_angles_xyz, euler_angles_zxy, axis_angle };

inline const char* to_string(Frame f) { return f == Frame::world ? "world" : "body"; }

inline const char* to_string(IntegratorKind k) {
  switch (k) {
    case IntegratorKind::exact_s3: return "exact_s3";
    case IntegratorKind::approx_renorm: return "approx_renorm";
    case IntegratorKind::euler_angles_xyz: return "euler_angles_xyz";
    case IntegratorKind::euler_angles_zxy: return "euler_angles_zxy";
    case IntegratorKind::axis_angle: return "axis_angle";
  }
  return "?";
}

struct StepConfig {
  double dt{0.04};
  /// Unset: each quaternion integrator uses its native convention
  /// (exact: world, approximate: body).
  std::optional<Frame> frame{};
  IntegratorKind kind{IntegratorKind::exact_s3};

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw DomainError("step size must be positive and finite, got " + std::to_string(dt));
    }
  }
};

struct RootState {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
};

/// Taylor branch threshold on |w| dt.
inline constexpr double kExpTaylorCutoff = 1e-8;

/// Exact solution of the QDE over dt for constant w:
/// (cos(|w| dt / 2), w/|w| sin(|w| dt / 2)).
template <typename Scalar>
Quaternion<Scalar> exp_qde(const Vector3<Scalar>& w, Scalar dt) {
  if (!w.allFinite()) {
    throw DomainError("exp_qde: non-finite angular velocity");
  }
  if (!(dt > Scalar(0))) {
    throw DomainError("exp_qde: step size must be positive");
  }
  const Scalar speed = w.norm();
  const Scalar angle = speed * dt;
  if (angle < Scalar(kExpTaylorCutoff)) {
    const Scalar h = angle / Scalar(2);
    return Quaternion<Scalar>(Scalar(1) - h * h / Scalar(2), w * (dt / Scalar(2)));
  }
  return Quaternion<Scalar>(std::cos(angle / Scalar(2)), w * (std::sin(angle / Scalar(2)) / speed));
}

/// One exact step on S^3. Never renormalizes.
template <typename Scalar>
Quaternion<Scalar> step_exact(const Quaternion<Scalar>& q, const Vector3<Scalar>& w_next,
                              const StepConfig& cfg) {
  require_unit(q, "step_exact");
  const Quaternion<Scalar> dq = exp_qde(w_next, Scalar(cfg.dt));
  return cfg.frame.value_or(Frame::world) == Frame::world ? hamilton(dq, q) : hamilton(q, dq);
}

/// First-order step followed by renormalization:
///   q_dot = q (x) (0, w/2);  q' = q + q_dot dt;  q' / |q'|.
/// `pre_norm`, when given, receives |q'| before the division.
template <typename Scalar>
Quaternion<Scalar> step_approx_renorm(const Quaternion<Scalar>& q, const Vector3<Scalar>& w,
                                      const StepConfig& cfg, Scalar* pre_norm = nullptr) {
  require_unit(q, "step_approx_renorm");
  const Quaternion<Scalar> half_w(Scalar(0), w / Scalar(2));
  const Quaternion<Scalar> q_dot =
      cfg.frame.value_or(Frame::body) == Frame::body ? hamilton(q, half_w) : hamilton(half_w, q);
  const Quaternion<Scalar> moved = q + q_dot * Scalar(cfg.dt);
  if (pre_norm != nullptr) *pre_norm = moved.norm();
  return moved.normalized();
}

/// Component-wise Euler step on an Euler-angle triple, wrapped to [0, 2 pi).
template <typename Scalar>
EulerAngles<Scalar> step_euler_repr(const EulerAngles<Scalar>& angles, const Vector3<Scalar>& rate,
                                    const StepConfig& cfg) {
  EulerAngles<Scalar> out = angles;
  out.angles = wrap_two_pi(Vector3<Scalar>(angles.angles + rate * Scalar(cfg.dt)));
  out.gimbal_locked = false;
  return out;
}

/// Component-wise Euler step on a rotation vector; no wrapping.
template <typename Scalar>
Vector3<Scalar> step_axis_angle(const Vector3<Scalar>& rotation_vector, const Vector3<Scalar>& rate,
                                const StepConfig& cfg) {
  return rotation_vector + rate * Scalar(cfg.dt);
}

template <typename Scalar>
Vector3<Scalar> step_omega(const Vector3<Scalar>& w, const Vector3<Scalar>& w_dot, const StepConfig& cfg) {
  return w + w_dot * Scalar(cfg.dt);
}

/// PD tracking of the root translation:
///   v' = v + (kp (r_ref - r) - kd v) dt,   r' = r + v' dt.
inline RootState step_root(const RootState& s, const Vec3& target, double kp, double kd,
                           const StepConfig& cfg) {
  if (kp < 0.0 || kd < 0.0) {
    throw DomainError("step_root: gains must be non-negative");
  }
  RootState next;
  next.velocity = s.velocity + (kp * (target - s.position) - kd * s.velocity) * cfg.dt;
  next.position = s.position + next.velocity * cfg.dt;
  return next;
}

}  // namespace quamo
