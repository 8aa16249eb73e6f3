#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "quamo/random.hpp"
#include "quamo/skeleton.hpp"

namespace quamo {

/// Uniformly sampled pose sequence.
struct MotionSequence {
  double dt{0.04};
  std::vector<PoseFrame> frames;

  std::size_t size() const { return frames.size(); }
  bool operator==(const MotionSequence&) const = default;
};

enum class MotionKind { constant_omega, step_target, sinusoid, random_walk, wrap_crossing };

inline const char* to_string(MotionKind k) {
  switch (k) {
    case MotionKind::constant_omega: return "constant_omega";
    case MotionKind::step_target: return "step_target";
    case MotionKind::sinusoid: return "sinusoid";
    case MotionKind::random_walk: return "random_walk";
    case MotionKind::wrap_crossing: return "wrap_crossing";
  }
  return "?";
}

inline MotionKind motion_kind_from_string(const std::string& s) {
  for (auto k : {MotionKind::constant_omega, MotionKind::step_target, MotionKind::sinusoid, MotionKind::random_walk,
                 MotionKind::wrap_crossing})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown motion kind '" + s + "'");
}

/// Single-axis angle trajectory of one joint. Which fields matter depends on
/// the motion kind:
///   constant_omega, wrap_crossing: start + rate t
///   step_target:   start, then start + step_size from step_frame on
///   sinusoid:      start + amplitude sin(rate t + phase)
///   random_walk:   velocity starts at rate and takes N(0, walk_sigma) kicks
struct JointMotion {
  int joint{0};
  Vec3 axis{0.0, 0.0, 1.0};
  double start{0.0};
  double rate{1.0};
  double amplitude{0.0};
  double phase{0.0};
  int step_frame{0};
  double step_size{0.0};
  double walk_sigma{0.0};
};

/// Root path: start + velocity t + sway_amplitude sin(sway_rate t) along y.
struct RootPath {
  Vec3 start{0.0, 0.0, 0.95};
  Vec3 velocity{Vec3::Zero()};
  double sway_amplitude{0.0};
  double sway_rate{0.0};
};

struct MotionSpec {
  MotionKind kind{MotionKind::constant_omega};
  std::vector<JointMotion> joints;
  RootPath root;
  std::size_t num_joints{24};
  std::size_t frames{100};
  double dt{0.04};
  double angular_sigma{0.0};     // rad
  double positional_sigma{0.0};  // m
  std::uint64_t seed{0};

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("motion spec: " + m); };
    if (frames < 3) fail("duration must be at least 3 frames");
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(angular_sigma >= 0.0) || !(positional_sigma >= 0.0)) fail("noise sigma must be non-negative");
    if (num_joints == 0) fail("num_joints must be positive");
    for (const auto& m : joints) {
      if (m.joint < 0 || static_cast<std::size_t>(m.joint) >= num_joints)
        fail("joint index " + std::to_string(m.joint) + " out of range");
      if (!(m.axis.norm() > 0.0) || !m.axis.allFinite()) fail("joint " + std::to_string(m.joint) + " has a zero axis");
      if (m.walk_sigma < 0.0) fail("walk_sigma must be non-negative");
      if (kind == MotionKind::wrap_crossing) {
        const double end = m.start + m.rate * dt * static_cast<double>(frames - 1);
        const double two_pi = 2.0 * std::numbers::pi;
        if (!(m.rate > 0.0) || !(m.start < two_pi) || !(end > two_pi))
          fail("wrap_crossing joint " + std::to_string(m.joint) + " must increase through 2*pi (start " +
               std::to_string(m.start) + ", end " + std::to_string(end) + ")");
      }
      if (kind == MotionKind::step_target && (m.step_frame < 0 || static_cast<std::size_t>(m.step_frame) >= frames))
        fail("step_frame out of range");
    }
  }
};

struct JointTrajectories {
  /// angle[m][k]: angle of spec.joints[m] about its axis at frame k.
  std::vector<std::vector<double>> angle;
  /// second_difference[m][k] = angle[k-1] - 2 angle[k] + angle[k+1] from the
  /// closed form of each kind (entries 0 and T-1 are unused and zero).
  std::vector<std::vector<double>> second_difference;
};

/// Clean motion plus the noisy references derived from it.
struct SynthMotion {
  MotionSpec spec;
  MotionSequence truth;
  MotionSequence reference;
  JointTrajectories analytic;
};

namespace detail {
inline constexpr std::uint64_t kWalkStream = 1;
inline constexpr std::uint64_t kNoiseStream = 2;
}  // namespace detail

inline JointTrajectories joint_trajectories(const MotionSpec& spec) {
  JointTrajectories out;
  Rng walk(spec.seed, detail::kWalkStream);
  const std::size_t n = spec.frames;
  for (const auto& m : spec.joints) {
    std::vector<double> a(n), d(n, 0.0);
    double velocity = m.rate;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * spec.dt;
      const bool interior = k > 0 && k + 1 < n;
      switch (spec.kind) {
        case MotionKind::constant_omega:
        case MotionKind::wrap_crossing: a[k] = m.start + m.rate * t; break;
        case MotionKind::step_target: {
          const auto step = static_cast<std::size_t>(m.step_frame);
          a[k] = m.start + (k >= step ? m.step_size : 0.0);
          if (interior && k + 1 == step) d[k] = m.step_size;
          if (interior && k == step) d[k] = -m.step_size;
          break;
        }
        case MotionKind::sinusoid: {
          a[k] = m.start + m.amplitude * std::sin(m.rate * t + m.phase);
          const double s = std::sin(m.rate * spec.dt / 2.0);
          if (interior) d[k] = -4.0 * s * s * m.amplitude * std::sin(m.rate * t + m.phase);
          break;
        }
        case MotionKind::random_walk:
          if (k == 0) {
            a[k] = m.start;
          } else {
            a[k] = a[k - 1] + velocity * spec.dt;
            const double kick = m.walk_sigma * walk.normal();
            velocity += kick;
            if (interior) d[k] = kick * spec.dt;
          }
          break;
      }
    }
    out.angle.push_back(std::move(a));
    out.second_difference.push_back(std::move(d));
  }
  return out;
}

inline Vec3 root_position(const RootPath& p, double t) {
  return p.start + p.velocity * t + Vec3(0.0, p.sway_amplitude * std::sin(p.sway_rate * t), 0.0);
}

/// Exact second difference root(k-1) - 2 root(k) + root(k+1) of the root path.
inline Vec3 root_second_difference(const RootPath& p, double t, double dt) {
  const double s = std::sin(p.sway_rate * dt / 2.0);
  return Vec3(0.0, -4.0 * s * s * p.sway_amplitude * std::sin(p.sway_rate * t), 0.0);
}

/// Composes a small random rotation onto every joint and jitters the root.
///
/// Angle ~ |N(0, angular_sigma)| about a uniform axis, applied on the left;
/// root gets N(0, positional_sigma) per axis. Sigma 0 leaves that part untouched.
inline MotionSequence corrupt(const MotionSequence& seq, double angular_sigma, double positional_sigma,
                              std::uint64_t seed) {
  if (angular_sigma < 0.0 || positional_sigma < 0.0) {
    throw DomainError("corrupt: sigma must be non-negative");
  }
  MotionSequence out = seq;
  Rng rng(seed, detail::kNoiseStream);
  for (auto& f : out.frames) {
    if (angular_sigma > 0.0) {
      for (auto& q : f.joints) {
        const Vec3 axis = rng.unit_vector();
        const double angle = std::abs(rng.normal()) * angular_sigma;
        q = hamilton(from_axis_angle(axis, angle), q).normalized();
      }
    }
    if (positional_sigma > 0.0) {
      f.root += Vec3(rng.normal(), rng.normal(), rng.normal()) * positional_sigma;
    }
  }
  return out;
}

inline SynthMotion generate(const MotionSpec& spec) {
  spec.validate();
  SynthMotion out;
  out.spec = spec;
  out.analytic = joint_trajectories(spec);
  out.truth.dt = spec.dt;
  out.truth.frames.resize(spec.frames);
  for (std::size_t k = 0; k < spec.frames; ++k) {
    PoseFrame& f = out.truth.frames[k];
    f.joints.assign(spec.num_joints, Quaterniond::identity());
    for (std::size_t m = 0; m < spec.joints.size(); ++m) {
      const auto& jm = spec.joints[m];
      f.joints[static_cast<std::size_t>(jm.joint)] = from_axis_angle<double>(jm.axis.normalized(), out.analytic.angle[m][k]);
    }
    f.root = root_position(spec.root, static_cast<double>(k) * spec.dt);
  }
  out.reference = corrupt(out.truth, spec.angular_sigma, spec.positional_sigma, spec.seed);
  return out;
}

// -- JSON ---------------------------------------------------------------------

inline nlohmann::json to_json(const MotionSpec& s) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& m : s.joints) {
    joints.push_back({{"joint", m.joint},
                      {"axis", {m.axis.x(), m.axis.y(), m.axis.z()}},
                      {"start", m.start},
                      {"rate", m.rate},
                      {"amplitude", m.amplitude},
                      {"phase", m.phase},
                      {"step_frame", m.step_frame},
                      {"step_size", m.step_size},
                      {"walk_sigma", m.walk_sigma}});
  }
  return {{"kind", to_string(s.kind)},
          {"joints", joints},
          {"root",
           {{"start", {s.root.start.x(), s.root.start.y(), s.root.start.z()}},
            {"velocity", {s.root.velocity.x(), s.root.velocity.y(), s.root.velocity.z()}},
            {"sway_amplitude", s.root.sway_amplitude},
            {"sway_rate", s.root.sway_rate}}},
          {"num_joints", s.num_joints},
          {"frames", s.frames},
          {"dt", s.dt},
          {"angular_sigma", s.angular_sigma},
          {"positional_sigma", s.positional_sigma},
          {"seed", s.seed}};
}

namespace detail {
inline Vec3 vec3_from_json(const nlohmann::json& j, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError(std::string(what) + " must have 3 entries");
  return {v[0], v[1], v[2]};
}
}  // namespace detail

inline MotionSpec motion_spec_from_json(const nlohmann::json& j) {
  MotionSpec s;
  try {
    s.kind = motion_kind_from_string(j.at("kind").get<std::string>());
    s.num_joints = j.value("num_joints", s.num_joints);
    s.frames = j.value("frames", s.frames);
    s.dt = j.value("dt", s.dt);
    s.angular_sigma = j.value("angular_sigma", s.angular_sigma);
    s.positional_sigma = j.value("positional_sigma", s.positional_sigma);
    s.seed = j.value("seed", s.seed);
    if (j.contains("root")) {
      const auto& r = j["root"];
      if (r.contains("start")) s.root.start = detail::vec3_from_json(r["start"], "root.start");
      if (r.contains("velocity")) s.root.velocity = detail::vec3_from_json(r["velocity"], "root.velocity");
      s.root.sway_amplitude = r.value("sway_amplitude", 0.0);
      s.root.sway_rate = r.value("sway_rate", 0.0);
    }
    for (const auto& e : j.value("joints", nlohmann::json::array())) {
      JointMotion m;
      m.joint = e.at("joint").get<int>();
      if (e.contains("axis")) m.axis = detail::vec3_from_json(e["axis"], "joint axis");
      m.start = e.value("start", s.kind == MotionKind::wrap_crossing ? 2.0 * std::numbers::pi - 0.5 : 0.0);
      m.rate = e.value("rate", m.rate);
      m.amplitude = e.value("amplitude", m.amplitude);
      m.phase = e.value("phase", m.phase);
      m.step_frame = e.value("step_frame", m.step_frame);
      m.step_size = e.value("step_size", m.step_size);
      m.walk_sigma = e.value("walk_sigma", m.walk_sigma);
      s.joints.push_back(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("motion spec: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace quamo
