#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace quamo {
namespace {

namespace fs = std::filesystem;

const std::string kData = QUAMO_TEST_DATA;
const std::string kConfigs = std::string(QUAMO_SOURCE_DIR) + "/configs";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("quamo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string(QUAMO_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  fs::path dir_;
};

TEST_F(Cli, MetricsMatchGoldenReport) {
  const Outcome r = run("metrics " + kData + "/metrics_pred.jsonl " + kData + "/metrics_gt.jsonl --format json --out " +
                        dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "metrics.json"), slurp(kData + "/metrics_golden.json"));
  EXPECT_EQ(slurp(dir_ / "metrics.txt"), slurp(kData + "/metrics_golden.txt"));
  EXPECT_EQ(r.out, slurp(kData + "/metrics_golden.json"));
}

TEST_F(Cli, MetricsAgreeWithLibrary) {
  const Outcome r = run("metrics " + kData + "/metrics_pred.jsonl " + kData + "/metrics_gt.jsonl --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const MotionSequence pred = read_jsonl(kData + "/metrics_pred.jsonl"), gt = read_jsonl(kData + "/metrics_gt.jsonl");
  const MetricReport m =
      evaluate_metrics(keypoints(pred, default_skeleton()), keypoints(gt, default_skeleton()), default_skeleton());
  EXPECT_EQ(j, to_json(m));
  EXPECT_GT(m.mpjpe, 0.0);
}

TEST_F(Cli, MetricsLengthMismatchNamesBoth) {
  MotionSequence gt = read_jsonl(kData + "/metrics_gt.jsonl");
  const std::size_t full = gt.size();
  gt.frames.resize(full - 3);
  write_jsonl(gt, (dir_ / "short.jsonl").string());
  const Outcome r = run("metrics " + kData + "/metrics_pred.jsonl " + (dir_ / "short.jsonl").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(std::to_string(full)), std::string::npos) << r.err;
  EXPECT_NE(r.err.find(std::to_string(full - 3)), std::string::npos) << r.err;
}

TEST_F(Cli, BadInputsExitTwo) {
  std::ofstream(dir_ / "broken.json") << "{ not json";
  std::ofstream(dir_ / "nomotion.json") << "{}";
  EXPECT_EQ(run("simulate --config " + (dir_ / "broken.json").string()).code, 2);
  EXPECT_EQ(run("simulate --config " + (dir_ / "nomotion.json").string()).code, 2);
  EXPECT_EQ(run("simulate --config /nonexistent.json").code, 2);
  EXPECT_EQ(run("simulate").code, 2);
  EXPECT_EQ(run("simulate --config " + kConfigs + "/step_target.json --seed x").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("metrics /nonexistent/a.jsonl /nonexistent/b.jsonl").code, 2);
  EXPECT_EQ(run("simulate --config " + kConfigs + "/step_target.json --format xml").code, 2);
}

TEST_F(Cli, DivergenceExitsThree) {
  auto cfg = nlohmann::json::parse(slurp(kConfigs + "/step_target.json"));
  cfg["gains"]["root_kp"] = 200;
  cfg["gains"]["root_kd"] = 200;
  cfg["motion"]["root"] = {{"velocity", {1.0, 0.0, 0.0}}};
  std::ofstream(dir_ / "diverge.json") << cfg.dump();
  const Outcome r = run("simulate --config " + (dir_ / "diverge.json").string() + " --seed 0");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("divergence"), std::string::npos);
}

TEST_F(Cli, SimulateWritesDeterministicOutputs) {
  const std::string cfg = kConfigs + "/step_target.json";
  ASSERT_EQ(run("simulate --config " + cfg + " --seed 0,1 --out " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(run("simulate --config " + cfg + " --seed 0,1 --out " + (dir_ / "b").string()).code, 0);
  for (const char* f : {"summary.json", "runs.csv", "seed_1/motion_0/trajectory.jsonl", "seed_1/motion_0/report.json",
                        "seed_0/motion_0/errors.csv"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  const auto report = nlohmann::json::parse(slurp(dir_ / "a" / "seed_0/motion_0/report.json"));
  EXPECT_EQ(report["config"]["seeds"], nlohmann::json::parse("[0, 1]"));
  EXPECT_TRUE(report["config"].contains("integrator"));
  EXPECT_TRUE(report["metrics"].contains("mpjpe_mm"));
}

TEST_F(Cli, GenWritesMotionPairsAndWeights) {
  ASSERT_EQ(run("gen --config " + kConfigs + "/wrap_crossing.json --seed 3 --out " + dir_.string()).code, 0);
  const MotionSequence truth = read_jsonl((dir_ / "motion0_seed3_truth.jsonl").string());
  EXPECT_EQ(truth.size(), 100u);
  EXPECT_TRUE(fs::exists(dir_ / "motion0_seed3_reference.jsonl"));
  ASSERT_EQ(run("gen --weights " + (dir_ / "w.json").string() + " --seed 0").code, 0);
  const ControlNet net = ControlNet::load((dir_ / "w.json").string());
  EXPECT_EQ(net.forward(Eigen::VectorXd::Ones(273)), ControlNet::from_seed(0).forward(Eigen::VectorXd::Ones(273)));
}

TEST_F(Cli, AblateAndTuneRun) {
  const Outcome a = run("ablate --config " + kConfigs + "/wrap_crossing.json --seed 0 --out " + dir_.string());
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_TRUE(fs::exists(dir_ / "ablation.csv"));
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "ablation.json"))["rows"].size(), 7u);
  const Outcome t = run("tune --config " + kConfigs + "/tune.json --seed 0 --format json");
  ASSERT_EQ(t.code, 0) << t.err;
  const auto j = nlohmann::json::parse(t.out);
  EXPECT_EQ(j["result"]["evaluated"].size(), 20u);
}

}  // namespace
}  // namespace quamo
