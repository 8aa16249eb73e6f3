#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "quamo/control_net.hpp"
#include "quamo/metrics.hpp"
#include "quamo/motion_io.hpp"
#include "quamo/synth.hpp"
#include "quamo/tracker.hpp"

namespace quamo {

enum class Representation { quaternion, euler_xyz, euler_zxy, axis_angle };

inline const char* to_string(Representation r) {
  switch (r) {
    case Representation::quaternion: return "quaternion";
    case Representation::euler_xyz: return "euler_xyz";
    case Representation::euler_zxy: return "euler_zxy";
    case Representation::axis_angle: return "axis_angle";
  }
  return "?";
}

inline Representation representation_from_string(const std::string& s) {
  for (auto r : {Representation::quaternion, Representation::euler_xyz, Representation::euler_zxy,
                 Representation::axis_angle})
    if (s == to_string(r)) return r;
  throw ConfigError("unknown representation '" + s + "'");
}

/// Integrator implied by a representation and the S^3 toggle.
inline IntegratorKind integrator_for(Representation r, bool exact) {
  switch (r) {
    case Representation::quaternion: return exact ? IntegratorKind::exact_s3 : IntegratorKind::approx_renorm;
    case Representation::euler_xyz: return IntegratorKind::euler_angles_xyz;
    case Representation::euler_zxy: return IntegratorKind::euler_angles_zxy;
    case Representation::axis_angle: return IntegratorKind::axis_angle;
  }
  return IntegratorKind::exact_s3;
}

enum class PolicyKind { constant, net };

struct GainConfig {
  PolicyKind policy{PolicyKind::constant};
  Gains joint{40.0, 30.0, 10.0, Vec3::Zero()};
  RootGains root{40.0, 20.0};
  std::string weights;                 // weight file for the net policy
  std::optional<std::uint64_t> net_seed;  // or generate weights from this seed
};

struct TuneConfig {
  enum class Method { grid, random };
  Method method{Method::grid};
  std::vector<double> kp_values{0, 5, 10, 15, 20, 25, 30, 35, 40};
  std::vector<double> kd_values{0, 5, 10, 15, 20, 25, 30};
  std::size_t samples{64};
  std::uint64_t seed{0};
  /// Candidates within this much of the best loss count as ties; ties go to
  /// the lowest kp, then the lowest kd.
  double tie_tolerance{0.0};
};

/// One experiment: motion suite, tracker variant, gains, seeds.
struct RunConfig {
  std::vector<MotionSpec> motions;
  Representation representation{Representation::quaternion};
  bool bias{true};
  bool exact{true};
  bool enhancement{true};
  std::optional<Frame> frame{};
  double dt{0.04};
  GainConfig gains{};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string skeleton;  // empty: built-in 24-joint skeleton
  ContactConfig contact{};
  double lambda{kDefaultShapeWeight};
  double divergence_limit{1e3};
  TuneConfig tune{};

  IntegratorKind integrator() const { return integrator_for(representation, exact); }
};

// -- config JSON ----------------------------------------------------------------

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json motions = nlohmann::json::array();
  for (const auto& m : c.motions) motions.push_back(to_json(m));
  nlohmann::json gains = {{"policy", c.gains.policy == PolicyKind::constant ? "constant" : "net"},
                          {"kp", c.gains.joint.kp},
                          {"kd", c.gains.joint.kd},
                          {"ka", c.gains.joint.ka},
                          {"bias", {c.gains.joint.bias.x(), c.gains.joint.bias.y(), c.gains.joint.bias.z()}},
                          {"root_kp", c.gains.root.kp},
                          {"root_kd", c.gains.root.kd},
                          {"weights", c.gains.weights}};
  gains["net_seed"] = c.gains.net_seed ? nlohmann::json(*c.gains.net_seed) : nlohmann::json(nullptr);
  return {{"motions", motions},
          {"representation", to_string(c.representation)},
          {"integrator", to_string(c.integrator())},
          {"toggles", {{"f_omega", c.bias}, {"s3", c.exact}, {"alpha", c.enhancement}}},
          {"frame", c.frame ? nlohmann::json(to_string(*c.frame)) : nlohmann::json("native")},
          {"dt", c.dt},
          {"gains", gains},
          {"seeds", c.seeds},
          {"skeleton", c.skeleton.empty() ? "builtin:smpl24" : c.skeleton},
          {"contact", {{"height", c.contact.height}, {"displacement", c.contact.displacement}}},
          {"lambda", c.lambda},
          {"divergence_limit", c.divergence_limit},
          {"tune",
           {{"method", c.tune.method == TuneConfig::Method::grid ? "grid" : "random"},
            {"kp_values", c.tune.kp_values},
            {"kd_values", c.tune.kd_values},
            {"samples", c.tune.samples},
            {"seed", c.tune.seed},
            {"tie_tolerance", c.tune.tie_tolerance}}}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    if (j.contains("motion")) c.motions.push_back(motion_spec_from_json(j["motion"]));
    for (const auto& m : j.value("motions", nlohmann::json::array())) c.motions.push_back(motion_spec_from_json(m));
    if (c.motions.empty()) throw ConfigError("config: no motion given (use \"motion\" or \"motions\")");
    c.representation = representation_from_string(j.value("representation", "quaternion"));
    if (j.contains("toggles")) {
      const auto& t = j["toggles"];
      c.bias = t.value("f_omega", c.bias);
      c.exact = t.value("s3", c.exact);
      c.enhancement = t.value("alpha", c.enhancement);
    }
    if (j.contains("frame")) {
      const auto f = j["frame"].get<std::string>();
      if (f == "world") c.frame = Frame::world;
      else if (f == "body") c.frame = Frame::body;
      else if (f != "native") throw ConfigError("config: frame must be world, body or native");
    }
    c.dt = j.value("dt", c.dt);
    if (!(c.dt > 0.0)) throw ConfigError("config: dt must be positive");
    for (auto& m : c.motions) m.dt = c.dt;
    if (j.contains("gains")) {
      const auto& g = j["gains"];
      const auto policy = g.value("policy", std::string("constant"));
      if (policy == "constant") c.gains.policy = PolicyKind::constant;
      else if (policy == "net") c.gains.policy = PolicyKind::net;
      else throw ConfigError("config: gains.policy must be constant or net");
      c.gains.joint.kp = g.value("kp", c.gains.joint.kp);
      c.gains.joint.kd = g.value("kd", c.gains.joint.kd);
      c.gains.joint.ka = g.value("ka", c.gains.joint.ka);
      if (g.contains("bias")) c.gains.joint.bias = detail::vec3_from_json(g["bias"], "gains.bias");
      c.gains.root.kp = g.value("root_kp", c.gains.root.kp);
      c.gains.root.kd = g.value("root_kd", c.gains.root.kd);
      c.gains.weights = g.value("weights", std::string());
      if (g.contains("net_seed") && !g["net_seed"].is_null()) c.gains.net_seed = g["net_seed"].get<std::uint64_t>();
      if (c.gains.policy == PolicyKind::net && c.gains.weights.empty() && !c.gains.net_seed)
        throw ConfigError("config: the net policy needs gains.weights or gains.net_seed");
      const GainScales s;
      if (c.gains.joint.kp < 0 || c.gains.joint.kp > s.kp || c.gains.joint.kd < 0 || c.gains.joint.kd > s.kd ||
          c.gains.joint.ka < 0 || c.gains.joint.ka > s.ka)
        throw ConfigError("config: joint gains must lie in [0, 40] (kp), [0, 30] (kd), [0, 40] (ka)");
      if (c.gains.root.kp < 0 || c.gains.root.kp > s.root_kp || c.gains.root.kd < 0 || c.gains.root.kd > s.root_kd)
        throw ConfigError("config: root gains must lie in [0, 200]");
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (c.seeds.empty()) throw ConfigError("config: seed list is empty");
    c.skeleton = j.value("skeleton", std::string());
    if (c.skeleton == "builtin:smpl24") c.skeleton.clear();
    if (j.contains("contact")) {
      c.contact.height = j["contact"].value("height", c.contact.height);
      c.contact.displacement = j["contact"].value("displacement", c.contact.displacement);
    }
    c.lambda = j.value("lambda", c.lambda);
    c.divergence_limit = j.value("divergence_limit", c.divergence_limit);
    if (j.contains("tune")) {
      const auto& t = j["tune"];
      const auto method = t.value("method", std::string("grid"));
      if (method == "grid") c.tune.method = TuneConfig::Method::grid;
      else if (method == "random") c.tune.method = TuneConfig::Method::random;
      else throw ConfigError("config: tune.method must be grid or random");
      if (t.contains("kp_values")) c.tune.kp_values = t["kp_values"].get<std::vector<double>>();
      if (t.contains("kd_values")) c.tune.kd_values = t["kd_values"].get<std::vector<double>>();
      c.tune.samples = t.value("samples", c.tune.samples);
      c.tune.seed = t.value("seed", c.tune.seed);
      c.tune.tie_tolerance = t.value("tie_tolerance", c.tune.tie_tolerance);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return run_config_from_json(j);
}

inline Skeleton resolve_skeleton(const RunConfig& c) {
  return c.skeleton.empty() ? default_skeleton() : load_skeleton(c.skeleton);
}

inline std::unique_ptr<GainPolicy> make_policy(const GainConfig& g) {
  if (g.policy == PolicyKind::constant) return std::make_unique<ConstantGainPolicy>(g.joint, g.root);
  if (!g.weights.empty()) return std::make_unique<NetGainPolicy>(ControlNet::load(g.weights));
  return std::make_unique<NetGainPolicy>(ControlNet::from_seed(*g.net_seed));
}

// -- single run -------------------------------------------------------------------

/// Source of reference frames for one run.
class ReferenceSource {
 public:
  virtual ~ReferenceSource() = default;
  virtual std::size_t size() const = 0;
  virtual const PoseFrame& reference(std::size_t t) const = 0;
};

class SequenceSource final : public ReferenceSource {
 public:
  explicit SequenceSource(const MotionSequence& seq) : seq_{&seq} {}
  std::size_t size() const override { return seq_->size(); }
  const PoseFrame& reference(std::size_t t) const override { return seq_->frames.at(t); }

 private:
  const MotionSequence* seq_;
};

/// Called after each estimated frame; lets tests audit reference access.
class FrameObserver {
 public:
  virtual ~FrameObserver() = default;
  virtual void on_frame(std::size_t t, const PoseFrame& estimate) = 0;
};

struct RunResult {
  MotionSequence predicted;
  MetricReport metrics;
  LossBreakdown loss;
  /// errors[t][j]: geodesic angle between estimate and clean truth.
  std::vector<std::vector<double>> errors;
  double final_error{0.0};  // max over joints at the last frame, rad
  double max_error{0.0};    // max over joints and frames, rad
};

inline TrackerOptions tracker_options(const RunConfig& c) {
  TrackerOptions o;
  o.dt = c.dt;
  o.bias = c.bias;
  o.exact = c.exact;
  o.enhancement = c.enhancement;
  o.frame = c.frame;
  o.divergence_limit = c.divergence_limit;
  return o;
}

/// Runs the tracker selected by `c.representation` over `source`.
inline MotionSequence track(const RunConfig& c, const GainPolicy& policy, const ReferenceSource& source,
                            FrameObserver* observer = nullptr) {
  const TrackerOptions opts = tracker_options(c);
  MotionSequence out;
  out.dt = c.dt;
  auto run = [&](auto rep) {
    Tracker<decltype(rep)> tracker(std::move(rep), policy, opts);
    for (std::size_t t = 0; t < source.size(); ++t) {
      out.frames.push_back(tracker.push(source.reference(t)));
      if (observer != nullptr) observer->on_frame(t, out.frames.back());
    }
  };
  switch (c.representation) {
    case Representation::quaternion: run(QuaternionRepresentation(opts)); break;
    case Representation::euler_xyz: run(EulerRepresentation(opts, EulerSequence::XYZ)); break;
    case Representation::euler_zxy: run(EulerRepresentation(opts, EulerSequence::ZXY)); break;
    case Representation::axis_angle: run(AxisAngleRepresentation(opts)); break;
  }
  return out;
}

inline KeypointSequence keypoints(const MotionSequence& seq, const Skeleton& skel) {
  KeypointSequence out;
  out.reserve(seq.size());
  for (const auto& f : seq.frames) out.push_back(forward_kinematics(f, skel));
  return out;
}

/// Scores a predicted sequence against the clean truth.
inline RunResult score(MotionSequence predicted, const MotionSequence& truth, const Skeleton& skel,
                       const RunConfig& c) {
  RunResult r;
  r.predicted = std::move(predicted);
  const KeypointSequence pk = keypoints(r.predicted, skel);
  const KeypointSequence gk = keypoints(truth, skel);
  r.metrics = evaluate_metrics(pk, gk, skel, c.contact);
  r.loss = loss_total(pk, gk, std::vector<double>(skel.size() - 1, 0.0), c.lambda);
  r.errors.resize(truth.size());
  for (std::size_t t = 0; t < truth.size(); ++t) {
    r.errors[t].resize(truth.frames[t].joints.size());
    for (std::size_t j = 0; j < r.errors[t].size(); ++j) {
      r.errors[t][j] = geodesic_angle(r.predicted.frames[t].joints[j], truth.frames[t].joints[j]);
      r.max_error = std::max(r.max_error, r.errors[t][j]);
    }
  }
  r.final_error = *std::max_element(r.errors.back().begin(), r.errors.back().end());
  return r;
}

inline RunResult simulate_motion(const RunConfig& c, const SynthMotion& motion, const GainPolicy& policy,
                                 const Skeleton& skel) {
  SequenceSource src(motion.reference);
  return score(track(c, policy, src), motion.truth, skel, c);
}

// -- experiment ---------------------------------------------------------------------

struct Stat {
  double mean{0.0};
  double std{0.0};  // sample standard deviation, 0 for a single run
};

inline Stat stat_of(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

struct RunRecord {
  std::size_t motion{0};
  std::uint64_t seed{0};
  RunResult result;
};

struct Aggregate {
  Stat mpjpe, p_mpjpe, accel, g_mpjpe, gre, g_accel, fs, loss, final_error, max_error;
};

inline Aggregate aggregate(const std::vector<RunRecord>& runs) {
  auto collect = [&](auto&& get) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(get(r.result));
    return stat_of(v);
  };
  Aggregate a;
  a.mpjpe = collect([](const RunResult& r) { return r.metrics.mpjpe; });
  a.p_mpjpe = collect([](const RunResult& r) { return r.metrics.p_mpjpe; });
  a.accel = collect([](const RunResult& r) { return r.metrics.accel; });
  a.g_mpjpe = collect([](const RunResult& r) { return r.metrics.g_mpjpe; });
  a.gre = collect([](const RunResult& r) { return r.metrics.gre; });
  a.g_accel = collect([](const RunResult& r) { return r.metrics.g_accel; });
  a.fs = collect([](const RunResult& r) { return r.metrics.fs; });
  a.loss = collect([](const RunResult& r) { return r.loss.total; });
  a.final_error = collect([](const RunResult& r) { return r.final_error; });
  a.max_error = collect([](const RunResult& r) { return r.max_error; });
  return a;
}

struct Simulation {
  RunConfig config;
  std::vector<RunRecord> runs;
  Aggregate summary;
};

/// Motion `m` of the suite with its noise seeded by `seed`.
inline SynthMotion motion_for(const RunConfig& c, std::size_t m, std::uint64_t seed) {
  MotionSpec spec = c.motions.at(m);
  spec.seed = seed;
  spec.dt = c.dt;
  return generate(spec);
}

/// Every (motion, seed) pair of the config. Throws DivergenceError on blow-up.
inline Simulation simulate(const RunConfig& c) {
  if (c.motions.empty()) throw ConfigError("simulate: no motions configured");
  const Skeleton skel = resolve_skeleton(c);
  const auto policy = make_policy(c.gains);
  Simulation sim;
  sim.config = c;
  for (std::size_t m = 0; m < c.motions.size(); ++m) {
    if (c.motions[m].num_joints != skel.size()) {
      throw ConfigError("motion " + std::to_string(m) + " has " + std::to_string(c.motions[m].num_joints) +
                        " joints but the skeleton has " + std::to_string(skel.size()));
    }
    for (const auto seed : c.seeds) {
      sim.runs.push_back({m, seed, simulate_motion(c, motion_for(c, m, seed), *policy, skel)});
    }
  }
  sim.summary = aggregate(sim.runs);
  return sim;
}

inline nlohmann::json to_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

inline nlohmann::json to_json(const Aggregate& a) {
  return {{"mpjpe_mm", to_json(a.mpjpe)},
          {"p_mpjpe_mm", to_json(a.p_mpjpe)},
          {"accel_mm_per_frame2", to_json(a.accel)},
          {"g_mpjpe_mm", to_json(a.g_mpjpe)},
          {"gre_mm", to_json(a.gre)},
          {"g_accel_mm_per_frame2", to_json(a.g_accel)},
          {"fs_percent", to_json(a.fs)},
          {"loss_total", to_json(a.loss)},
          {"final_geodesic_error_rad", to_json(a.final_error)},
          {"max_geodesic_error_rad", to_json(a.max_error)}};
}

inline nlohmann::json run_json(const RunRecord& r) {
  return {{"motion", r.motion},
          {"seed", r.seed},
          {"frames", r.result.predicted.size()},
          {"metrics", to_json(r.result.metrics)},
          {"loss", {{"local", r.result.loss.local}, {"global", r.result.loss.global}, {"beta", r.result.loss.beta},
                    {"total", r.result.loss.total}}},
          {"final_geodesic_error_rad", r.result.final_error},
          {"max_geodesic_error_rad", r.result.max_error}};
}

inline nlohmann::json to_json(const Simulation& s) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : s.runs) runs.push_back(run_json(r));
  return {{"config", to_json(s.config)}, {"runs", runs}, {"aggregate", to_json(s.summary)}};
}

/// Per-frame tracking error, one row per frame: frame,t,max_error,joint_0..joint_{N-1}.
inline std::string errors_csv(const RunResult& r, double dt) {
  std::string out = "frame,t,max_error";
  const std::size_t n = r.errors.empty() ? 0 : r.errors[0].size();
  for (std::size_t j = 0; j < n; ++j) out += ",joint_" + std::to_string(j);
  out += '\n';
  char buf[64];
  for (std::size_t t = 0; t < r.errors.size(); ++t) {
    const double mx = *std::max_element(r.errors[t].begin(), r.errors[t].end());
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.9g", t, static_cast<double>(t) * dt, mx);
    out += buf;
    for (const double e : r.errors[t]) {
      std::snprintf(buf, sizeof buf, ",%.9g", e);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline std::string format_stat(const Stat& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f±%.3f", s.mean, s.std);
  return buf;
}

inline std::string summary_table(const Aggregate& a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-22s %s\n%-22s %s\n%-22s %s\n%-22s %s\n%-22s %s\n%-22s %s\n%-22s %s\n%-22s %s\n%-22s %s\n",
                "MPJPE [mm]", format_stat(a.mpjpe).c_str(), "P-MPJPE [mm]", format_stat(a.p_mpjpe).c_str(),
                "Accel [mm/f^2]", format_stat(a.accel).c_str(), "G-MPJPE [mm]", format_stat(a.g_mpjpe).c_str(),
                "GRE [mm]", format_stat(a.gre).c_str(), "G-Accel [mm/f^2]", format_stat(a.g_accel).c_str(),
                "FS [%]", format_stat(a.fs).c_str(), "final error [rad]", format_stat(a.final_error).c_str(),
                "max error [rad]", format_stat(a.max_error).c_str());
  return buf;
}

}  // namespace quamo
