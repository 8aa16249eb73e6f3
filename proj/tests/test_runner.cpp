#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

namespace quamo {
namespace {

MotionSpec step_spec(int joint, std::size_t frames = 150) {
  MotionSpec s;
  s.kind = MotionKind::step_target;
  JointMotion m;
  m.joint = joint;
  m.axis = Vec3(1, 0, 0);
  m.step_frame = 10;
  m.step_size = 0.3;
  s.joints = {m};
  s.frames = frames;
  return s;
}

MotionSpec omega_spec(double rate, double sigma, std::size_t frames = 60) {
  MotionSpec s;
  s.kind = MotionKind::constant_omega;
  JointMotion a;
  a.joint = 16;
  a.axis = Vec3(0, 0, 1);
  a.rate = rate;
  JointMotion b;
  b.joint = 4;
  b.axis = Vec3(1, 0, 0);
  b.rate = -0.5 * rate;
  s.joints = {a, b};
  s.frames = frames;
  s.angular_sigma = sigma;
  return s;
}

RunConfig config_with(MotionSpec m, std::vector<std::uint64_t> seeds = {0, 1}) {
  RunConfig c;
  c.motions = {std::move(m)};
  c.seeds = std::move(seeds);
  return c;
}

// Records which references were requested and checks none is ahead of the output.
class AuditingSource final : public ReferenceSource, public FrameObserver {
 public:
  explicit AuditingSource(const MotionSequence& seq) : seq_{&seq} {}
  std::size_t size() const override { return seq_->size(); }
  const PoseFrame& reference(std::size_t t) const override {
    if (t > emitted_) violations_++;
    requested_ = std::max(requested_, t);
    return seq_->frames.at(t);
  }
  void on_frame(std::size_t t, const PoseFrame&) override {
    if (requested_ > t) violations_++;
    emitted_ = t + 1;
    frames_++;
  }
  int violations() const { return violations_; }
  std::size_t frames() const { return frames_; }

 private:
  const MotionSequence* seq_;
  mutable std::size_t requested_{0};
  mutable int violations_{0};
  std::size_t emitted_{0};
  std::size_t frames_{0};
};

TEST(Track, NeverReadsAheadOfOutput) {
  MotionSpec spec = omega_spec(1.0, 0.02);
  const SynthMotion m = generate(spec);
  for (auto rep : {Representation::quaternion, Representation::euler_xyz, Representation::axis_angle}) {
    RunConfig c = config_with(spec);
    c.representation = rep;
    AuditingSource src(m.reference);
    const auto policy = make_policy(c.gains);
    const MotionSequence out = track(c, *policy, src, &src);
    EXPECT_EQ(src.violations(), 0) << to_string(rep);
    EXPECT_EQ(src.frames(), m.reference.size());
    EXPECT_EQ(out.size(), m.reference.size());
  }
}

TEST(Track, FutureReferencesDoNotChangePastEstimates) {
  const SynthMotion m = generate(omega_spec(1.0, 0.02));
  MotionSequence altered = m.reference;
  for (std::size_t t = 30; t < altered.size(); ++t) {
    for (auto& q : altered.frames[t].joints) q = test::random_unit();
    altered.frames[t].root += Vec3(0.5, 0, 0);
  }
  const RunConfig c = config_with(omega_spec(1.0, 0.02));
  const auto policy = make_policy(c.gains);
  const MotionSequence a = track(c, *policy, SequenceSource(m.reference));
  const MotionSequence b = track(c, *policy, SequenceSource(altered));
  // The estimate for frame t is driven by references up to t - 1.
  for (std::size_t t = 0; t <= 30; ++t) EXPECT_EQ(a.frames[t], b.frames[t]) << t;
  EXPECT_NE(a.frames[31], b.frames[31]);
}

TEST(Track, FirstFrameIsTheReference) {
  const SynthMotion m = generate(omega_spec(1.0, 0.05));
  const RunConfig c = config_with(omega_spec(1.0, 0.05));
  const auto policy = make_policy(c.gains);
  const MotionSequence out = track(c, *policy, SequenceSource(m.reference));
  EXPECT_EQ(out.frames[0], m.reference.frames[0]);
}

TEST(Simulate, Deterministic) {
  RunConfig c = config_with(omega_spec(1.0, 0.03));
  c.motions[0].positional_sigma = 0.005;
  EXPECT_EQ(to_json(simulate(c)).dump(), to_json(simulate(c)).dump());
}

TEST(Simulate, ZeroNoiseStepConverges) {
  const RunConfig c = config_with(step_spec(16), {0});
  const Simulation sim = simulate(c);
  ASSERT_EQ(sim.runs.size(), 1u);
  EXPECT_LT(sim.runs[0].result.final_error, 1e-3);
  EXPECT_EQ(sim.runs[0].result.metrics.fs, 0.0);
  EXPECT_GT(sim.runs[0].result.max_error, 0.1);
}

TEST(Simulate, SeedsAndMotionsEnumerated) {
  RunConfig c = config_with(omega_spec(1.0, 0.03), {4, 9, 2});
  c.motions.push_back(step_spec(16, 40));
  const Simulation sim = simulate(c);
  ASSERT_EQ(sim.runs.size(), 6u);
  EXPECT_EQ(sim.runs[0].motion, 0u);
  EXPECT_EQ(sim.runs[2].seed, 2u);
  EXPECT_EQ(sim.runs[3].motion, 1u);
  const Stat s = stat_of({1.0, 2.0, 4.0});
  EXPECT_NEAR(s.mean, 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.std, std::sqrt(7.0 / 3.0), 1e-15);
  EXPECT_EQ(stat_of({5.0}).std, 0.0);
}

TEST(Simulate, DivergenceReported) {
  RunConfig c = config_with(omega_spec(1.0, 0.03), {0});
  c.gains.root = {200.0, 200.0};
  c.motions[0].root.velocity = Vec3(1, 0, 0);
  try {
    simulate(c);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("root"), std::string::npos);
  }
}

TEST(Simulate, JointCountMustMatchSkeleton) {
  RunConfig c = config_with(omega_spec(1.0, 0.0), {0});
  c.motions[0].num_joints = 20;
  EXPECT_THROW(simulate(c), ConfigError);
}

TEST(RunConfig, JsonEchoRoundTrip) {
  RunConfig c = config_with(step_spec(4), {3, 5});
  c.representation = Representation::euler_zxy;
  c.frame = Frame::body;
  c.gains.joint = {12.5, 7.0, 3.0, Vec3(0.1, 0, 0)};
  c.gains.root = {30.0, 15.0};
  c.tune.method = TuneConfig::Method::random;
  c.tune.samples = 9;
  const RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  EXPECT_EQ(to_json(c)["integrator"], "euler_angles_zxy");
}

TEST(RunConfig, ShippedConfigsParse) {
  for (const char* name : {"wrap_crossing", "step_target", "walk", "tune", "net_policy"}) {
    EXPECT_NO_THROW(load_run_config(std::string(QUAMO_SOURCE_DIR) + "/configs/" + name + ".json")) << name;
  }
}

TEST(RunConfig, Errors) {
  auto parse = [](const std::string& text) { return run_config_from_json(nlohmann::json::parse(text)); };
  const std::string motion = R"("motion": {"kind": "constant_omega", "joints": [{"joint": 1}]})";
  EXPECT_NO_THROW(parse("{" + motion + "}"));
  EXPECT_THROW(parse("{}"), ConfigError);
  EXPECT_THROW(parse("{" + motion + R"(, "representation": "matrix"})"), ConfigError);
  EXPECT_THROW(parse("{" + motion + R"(, "frame": "sideways"})"), ConfigError);
  EXPECT_THROW(parse("{" + motion + R"(, "dt": 0})"), ConfigError);
  EXPECT_THROW(parse("{" + motion + R"(, "gains": {"kp": 41}})"), ConfigError);
  EXPECT_THROW(parse("{" + motion + R"(, "gains": {"root_kd": -1}})"), ConfigError);
  EXPECT_THROW(parse("{" + motion + R"(, "gains": {"policy": "net"}})"), ConfigError);
  EXPECT_THROW(parse("{" + motion + R"(, "seeds": []})"), ConfigError);
  EXPECT_THROW(parse("{" + motion + R"(, "tune": {"method": "annealing"}})"), ConfigError);
  EXPECT_THROW(parse("{" + motion + R"(, "toggles": {"s3": "yes"}})"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST(RunConfig, DtPropagatesToMotions) {
  const RunConfig c = run_config_from_json(nlohmann::json::parse(
      R"({"dt": 0.01, "motion": {"kind": "constant_omega", "dt": 0.04, "joints": [{"joint": 1}]}})"));
  EXPECT_EQ(c.motions[0].dt, 0.01);
}

TEST(Ablation, SevenRowsInOrder) {
  const auto rows = ablation_rows();
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0].representation, Representation::euler_xyz);
  EXPECT_EQ(rows[1].representation, Representation::euler_zxy);
  EXPECT_EQ(rows[2].representation, Representation::axis_angle);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_FALSE(rows[i].bias || rows[i].exact || rows[i].enhancement);
  EXPECT_TRUE(rows[4].bias && !rows[4].exact && !rows[4].enhancement);
  EXPECT_TRUE(rows[5].bias && rows[5].exact && !rows[5].enhancement);
  EXPECT_TRUE(rows[6].bias && rows[6].exact && rows[6].enhancement);
}

TEST(Ablation, EulerSpikesAtWrap) {
  const RunConfig c = load_run_config(std::string(QUAMO_SOURCE_DIR) + "/configs/wrap_crossing.json");
  const auto rows = ablate(c);
  ASSERT_EQ(rows.size(), 7u);
  double euler_max = 0.0, quaternion_max = 1e9;
  for (const auto& r : rows) {
    ASSERT_FALSE(r.diverged) << r.diagnosis;
    if (r.representation == Representation::euler_xyz) euler_max = r.summary.max_error.mean;
    if (r.representation == Representation::quaternion && r.exact && r.enhancement)
      quaternion_max = r.summary.max_error.mean;
  }
  EXPECT_GT(euler_max, 10.0 * quaternion_max);
  const std::string table = ablation_table(rows);
  EXPECT_NE(table.find("Euler"), std::string::npos);
  EXPECT_EQ(to_json(rows).size(), 7u);
}

TEST(Ablation, ExactStepNeverWorseOnConstantOmega) {
  for (double rate : {0.5, 2.0, 5.0, 10.0}) {
    for (double sigma : {0.0}) {
      RunConfig base = config_with(omega_spec(rate, sigma, 80), {0});
      base.bias = true;
      base.enhancement = false;
      base.exact = false;
      const Simulation approx = simulate(base);
      base.exact = true;
      const Simulation exact = simulate(base);
      EXPECT_LE(exact.summary.final_error.mean, approx.summary.final_error.mean)
          << "rate " << rate << " sigma " << sigma;
    }
  }
}

TEST(Report, ErrorsCsvAndTable) {
  const Simulation sim = simulate(config_with(step_spec(16, 20), {0}));
  const std::string csv = errors_csv(sim.runs[0].result, 0.04);
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("frame,t,max_error,joint_0,"), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 21u);
  EXPECT_NE(summary_table(sim.summary).find("MPJPE [mm]"), std::string::npos);
  EXPECT_EQ(format_stat({1.23456, 0.5}), "1.235±0.500");
}

}  // namespace
}  // namespace quamo
