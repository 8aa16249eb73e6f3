#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "quamo/control_net.hpp"
#include "quamo/controller.hpp"
#include "quamo/integrators.hpp"
#include "quamo/skeleton.hpp"

namespace quamo {

struct TrackerOptions {
  double dt{0.04};
  bool bias{false};         // add b (learned, or velocity feed-forward for constant gains)
  bool exact{true};         // exact S^3 step, otherwise first-order + renormalize
  bool enhancement{false};  // second-difference reference term
  std::optional<Frame> frame{};  // integrator frame override
  bool adapt_frame{true};   // express the world-frame control velocity in the integrator's frame
  double divergence_limit{1e3};
};

// -- rotation representations --------------------------------------------------
//
// A representation supplies the per-joint state type and the five operations
// the tracking law needs: conversion from/to a quaternion, the tracking error
// against a reference, the reference second difference, the reference
// velocity and the integration step. Errors are scaled so that a rotation of
// angle a about one axis gives roughly a/2 in every representation, matching
// the vector part of the quaternion error.

class QuaternionRepresentation {
 public:
  using State = Quaterniond;
  static constexpr const char* name = "quaternion";

  explicit QuaternionRepresentation(const TrackerOptions& o) : opts_{o} {}

  State from_rotation(const Quaterniond& q) const { return q; }
  Quaterniond to_rotation(const State& s) const { return s; }
  Vec3 error(const State& ref, const State& s) const { return pd_error(ref, s); }
  Vec3 second_difference(const State& a, const State& b, const State& c) const {
    ReferenceWindow w;
    w.q = {a, b, c};
    return accel_enhancement(w);
  }
  Vec3 velocity(const State& prev, const State& cur) const {
    return log_map(hamilton(cur, conjugate(prev))) / opts_.dt;
  }
  State integrate(const State& q, const Vec3& omega_world) const {
    StepConfig cfg{opts_.dt, opts_.frame, opts_.exact ? IntegratorKind::exact_s3 : IntegratorKind::approx_renorm};
    const Frame native = opts_.exact ? Frame::world : Frame::body;
    const Frame frame = opts_.frame.value_or(native);
    cfg.frame = frame;
    const Vec3 w = (opts_.adapt_frame && frame == Frame::body) ? rotate(conjugate(q), omega_world) : omega_world;
    return opts_.exact ? step_exact(q, w, cfg) : step_approx_renorm(q, w, cfg);
  }

 private:
  TrackerOptions opts_;
};

/// Euler-angle baseline: component-wise errors and integration, with the
/// angles wrapped to [0, 2 pi) after every step.
class EulerRepresentation {
 public:
  using State = Vec3;

  EulerRepresentation(const TrackerOptions& o, EulerSequence seq) : opts_{o}, seq_{seq} {}

  State from_rotation(const Quaterniond& q) const { return to_euler(q, seq_).angles; }
  Quaterniond to_rotation(const State& s) const { return from_euler(EulerAnglesd{seq_, s, false}); }
  Vec3 error(const State& ref, const State& s) const { return 0.5 * (ref - s); }
  Vec3 second_difference(const State& a, const State& b, const State& c) const {
    return 0.5 * ((c - b) - (b - a));
  }
  Vec3 velocity(const State& prev, const State& cur) const { return (cur - prev) / opts_.dt; }
  State integrate(const State& s, const Vec3& rate) const {
    return step_euler_repr(EulerAnglesd{seq_, s, false}, rate, StepConfig{opts_.dt}).angles;
  }

 private:
  TrackerOptions opts_;
  EulerSequence seq_;
};

/// Rotation-vector baseline: component-wise errors, unwrapped integration.
class AxisAngleRepresentation {
 public:
  using State = Vec3;

  explicit AxisAngleRepresentation(const TrackerOptions& o) : opts_{o} {}

  State from_rotation(const Quaterniond& q) const { return log_map(q); }
  Quaterniond to_rotation(const State& s) const { return exp_map(s); }
  Vec3 error(const State& ref, const State& s) const { return 0.5 * (ref - s); }
  Vec3 second_difference(const State& a, const State& b, const State& c) const {
    return 0.5 * ((c - b) - (b - a));
  }
  Vec3 velocity(const State& prev, const State& cur) const { return (cur - prev) / opts_.dt; }
  State integrate(const State& s, const Vec3& rate) const { return step_axis_angle(s, rate, StepConfig{opts_.dt}); }

 private:
  TrackerOptions opts_;
};

/// Online pose tracker.
///
/// push() consumes reference frame t and returns the estimate for frame t.
/// Frame 0 is the reference itself; frame 1 initializes velocities from the
/// first two references and takes the first control step. From then on the
/// estimate for t is one step of the tracking law driven by references
/// t-3 .. t-1, so no reference later than the one just pushed is ever read.
template <typename Rep>
class Tracker {
 public:
  using State = typename Rep::State;

  Tracker(Rep rep, const GainPolicy& policy, TrackerOptions opts)
      : rep_{std::move(rep)}, policy_{&policy}, opts_{opts} {}

  PoseFrame push(const PoseFrame& reference) {
    if (frame_ > 0 && reference.joints.size() != joints_.size()) {
      throw DomainError("Tracker: reference has " + std::to_string(reference.joints.size()) + " joints, expected " +
                        std::to_string(joints_.size()));
    }
    for (const auto& q : reference.joints) require_unit(q, "Tracker reference", 1e-9);

    std::vector<State> converted(reference.joints.size());
    for (std::size_t j = 0; j < converted.size(); ++j) converted[j] = rep_.from_rotation(reference.joints[j]);

    if (frame_ == 0) {
      joints_ = converted;
      omega_.assign(converted.size(), Vec3::Zero());
      root_.position = reference.root;
      root_.velocity = Vec3::Zero();
    } else {
      if (frame_ == 1) {
        const auto& first = history_.back();
        for (std::size_t j = 0; j < joints_.size(); ++j) omega_[j] = rep_.velocity(first.joints[j], converted[j]);
        root_.velocity = (reference.root - first.root) / opts_.dt;
      }
      step();
    }
    history_.push_back({converted, reference.joints, reference.root});
    if (history_.size() > 3) history_.erase(history_.begin());
    ++frame_;
    return estimate();
  }

  PoseFrame estimate() const {
    PoseFrame f;
    f.joints.reserve(joints_.size());
    for (const auto& s : joints_) f.joints.push_back(rep_.to_rotation(s));
    f.root = root_.position;
    return f;
  }

  std::size_t frames_consumed() const { return frame_; }
  const std::vector<Vec3>& omega() const { return omega_; }
  const RootState& root() const { return root_; }
  /// Angular accelerations applied in the most recent step.
  const std::vector<Vec3>& last_accel() const { return last_accel_; }
  const PolicyOutput& last_gains() const { return last_gains_; }

 private:
  struct Past {
    std::vector<State> joints;
    std::vector<Quaterniond> rotations;
    Vec3 root;
  };

  // Advances the state by one frame using the references up to frame_ - 1.
  void step() {
    const std::size_t n = history_.size();
    const Past& cur = history_[n - 1];
    const Past& one_back = history_[n >= 2 ? n - 2 : n - 1];
    const Past& two_back = history_[n >= 3 ? n - 3 : (n >= 2 ? n - 2 : n - 1)];

    std::vector<JointState> state(joints_.size());
    for (std::size_t j = 0; j < joints_.size(); ++j) state[j] = {rep_.to_rotation(joints_[j]), omega_[j]};
    PolicyInput in{&state, &cur.rotations, root_, cur.root};
    last_gains_ = policy_->evaluate(in);
    if (last_gains_.joints.size() != joints_.size()) {
      throw DomainError("Tracker: gain policy returned " + std::to_string(last_gains_.joints.size()) + " joints");
    }

    last_accel_.resize(joints_.size());
    for (std::size_t j = 0; j < joints_.size(); ++j) {
      const Gains& g = last_gains_.joints[j];
      Vec3 acc = g.kp * rep_.error(cur.joints[j], joints_[j]) - g.kd * omega_[j];
      if (opts_.bias) {
        acc += last_gains_.has_bias ? g.bias : Vec3(g.kd * rep_.velocity(one_back.joints[j], cur.joints[j]));
      }
      if (opts_.enhancement && g.ka != 0.0) {
        acc += g.ka * rep_.second_difference(two_back.joints[j], one_back.joints[j], cur.joints[j]);
      }
      last_accel_[j] = acc;
      const Vec3 next_omega = step_omega(omega_[j], acc, StepConfig{opts_.dt});
      if (!next_omega.allFinite() || next_omega.norm() > opts_.divergence_limit) {
        throw DivergenceError("angular velocity of joint " + std::to_string(j) + " reached " +
                              std::to_string(next_omega.norm()) + " rad/s at frame " + std::to_string(frame_) +
                              " (limit " + std::to_string(opts_.divergence_limit) +
                              "); lower the gains or the step size");
      }
      omega_[j] = next_omega;
      joints_[j] = rep_.integrate(joints_[j], omega_[j]);
    }

    root_ = step_root(root_, cur.root, last_gains_.root.kp, last_gains_.root.kd, StepConfig{opts_.dt});
    if (!root_.velocity.allFinite() || root_.velocity.norm() > opts_.divergence_limit) {
      throw DivergenceError("root velocity reached " + std::to_string(root_.velocity.norm()) + " m/s at frame " +
                            std::to_string(frame_) + "; lower the root gains");
    }
  }

  Rep rep_;
  const GainPolicy* policy_;
  TrackerOptions opts_;
  std::size_t frame_{0};
  std::vector<State> joints_;
  std::vector<Vec3> omega_;
  RootState root_;
  std::vector<Past> history_;
  std::vector<Vec3> last_accel_;
  PolicyOutput last_gains_;
};

}  // namespace quamo
