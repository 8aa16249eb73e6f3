#pragma once

#include <array>
#include <vector>

#include "quamo/integrators.hpp"
#include "quamo/quaternion.hpp"

namespace quamo {

/// Per-joint control parameters of the meta-PD law.
struct Gains {
  double kp{0.0};
  double kd{0.0};
  double ka{0.0};
  Vec3 bias{Vec3::Zero()};  // rad/s^2
};

struct RootGains {
  double kp{0.0};
  double kd{0.0};
};

/// Upper bounds of the sigmoid-scaled gain heads.
struct GainScales {
  double ka{40.0};
  double kp{40.0};
  double kd{30.0};
  double root_kp{200.0};
  double root_kd{200.0};
};

inline bool within_scales(const Gains& g, const GainScales& s) {
  return g.kp >= 0.0 && g.kp <= s.kp && g.kd >= 0.0 && g.kd <= s.kd && g.ka >= 0.0 && g.ka <= s.ka;
}

/// The last three reference rotations of one joint, oldest first.
struct ReferenceWindow {
  std::array<Quaterniond, 3> q{};  // q[0] = t - 2dt, q[1] = t - dt, q[2] = t

  const Quaterniond& current() const { return q[2]; }

  /// Window at frame t over `history`, repeating the first frame for t < 2.
  template <typename Lookup>
  static ReferenceWindow at(std::size_t t, Lookup&& lookup) {
    ReferenceWindow w;
    w.q[2] = lookup(t);
    w.q[1] = lookup(t >= 1 ? t - 1 : 0);
    w.q[0] = lookup(t >= 2 ? t - 2 : 0);
    return w;
  }
};

struct JointState {
  Quaterniond q{};
  Vec3 omega{Vec3::Zero()};
};

struct FullState {
  std::vector<JointState> joints;
  RootState root;
  std::vector<double> beta_fix;  // one scale offset per bone
};

/// vec(q_ref (x) q*), after flipping q_ref onto the hemisphere of q.
inline Vec3 pd_error(const Quaterniond& q_ref, const Quaterniond& q) {
  require_unit(q_ref, "pd_error");
  require_unit(q, "pd_error");
  return vec(hamilton(canonicalize(q_ref, q), conjugate(q)));
}

/// vec(q_t (x) q*_{t-1}) - vec(q_{t-1} (x) q*_{t-2}) over the reference window.
inline Vec3 accel_enhancement(const ReferenceWindow& w) {
  const Quaterniond mid = canonicalize(w.q[1], w.q[0]);
  const Quaterniond cur = canonicalize(w.q[2], mid);
  return vec(hamilton(cur, conjugate(mid))) - vec(hamilton(mid, conjugate(w.q[0])));
}

/// Angular acceleration of one joint:
///   kp vec(q_ref (x) q*) - kd w + b + ka (second difference of references).
inline Vec3 angular_accel(const Quaterniond& q, const Vec3& omega, const ReferenceWindow& w, const Gains& g) {
  Vec3 acc = g.kp * pd_error(w.current(), q) - g.kd * omega + g.bias;
  if (g.ka != 0.0) {
    acc += g.ka * accel_enhancement(w);
  }
  return acc;
}

/// Analytic initial state from the first two reference frames.
inline FullState init_state(const std::vector<Quaterniond>& ref0, const std::vector<Quaterniond>& ref1,
                            const Vec3& root0, const Vec3& root1, double dt) {
  if (ref0.size() != ref1.size()) {
    throw DomainError("init_state: reference frames differ in joint count");
  }
  if (!(dt > 0.0)) {
    throw DomainError("init_state: step size must be positive");
  }
  FullState s;
  s.joints.resize(ref0.size());
  for (std::size_t j = 0; j < ref0.size(); ++j) {
    require_unit(ref0[j], "init_state");
    require_unit(ref1[j], "init_state");
    s.joints[j].q = ref0[j];
    s.joints[j].omega = log_map(hamilton(ref1[j], conjugate(ref0[j]))) / dt;
  }
  s.root.position = root0;
  s.root.velocity = (root1 - root0) / dt;
  s.beta_fix.assign(ref0.empty() ? 0 : ref0.size() - 1, 0.0);
  return s;
}

}  // namespace quamo
