// quamo: experiment runner for the quaternion tracking toolkit.
//
//   quamo gen      --config run.json --seed 0,1 --out DIR   synthetic motions
//   quamo gen      --weights FILE --seed 0                  control-net weights
//   quamo simulate --config run.json [--seed ...] --out DIR
//   quamo ablate   --config run.json [--seed ...] --out DIR
//   quamo metrics  PRED.jsonl GT.jsonl [--skeleton FILE]
//   quamo tune     --config run.json [--seed ...] --out DIR
//
// Exit codes: 0 success, 2 configuration or input error, 3 numeric divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quamo/quamo.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw quamo::ConfigError("--seed: '" + item + "' is not a non-negative integer");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw quamo::ConfigError("--seed: empty seed list");
  return seeds;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw quamo::ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

struct Common {
  std::string config;
  std::string seeds;
  std::string out;
  std::string format{"table"};
};

quamo::RunConfig load(const Common& o) {
  if (o.config.empty()) throw quamo::ConfigError("--config is required");
  quamo::RunConfig c = quamo::load_run_config(o.config);
  if (!o.seeds.empty()) c.seeds = parse_seeds(o.seeds);
  return c;
}

std::string runs_csv(const quamo::Simulation& sim) {
  std::string out = "motion,seed,mpjpe,p_mpjpe,accel,g_mpjpe,gre,g_accel,fs,loss,final_error,max_error\n";
  char buf[512];
  for (const auto& r : sim.runs) {
    const auto& m = r.result.metrics;
    std::snprintf(buf, sizeof buf, "%zu,%llu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.motion,
                  static_cast<unsigned long long>(r.seed), m.mpjpe, m.p_mpjpe, m.accel, m.g_mpjpe, m.gre, m.g_accel,
                  m.fs, r.result.loss.total, r.result.final_error, r.result.max_error);
    out += buf;
  }
  return out;
}

int cmd_gen(const Common& o, const std::string& weights) {
  if (!weights.empty()) {
    const auto seeds = o.seeds.empty() ? std::vector<std::uint64_t>{0} : parse_seeds(o.seeds);
    quamo::ControlNet::from_seed(seeds.front()).save(weights);
    std::cout << "wrote " << weights << '\n';
    return 0;
  }
  const quamo::RunConfig c = load(o);
  const fs::path out = o.out.empty() ? fs::path(".") : fs::path(o.out);
  for (std::size_t m = 0; m < c.motions.size(); ++m) {
    for (const auto seed : c.seeds) {
      const quamo::SynthMotion motion = quamo::motion_for(c, m, seed);
      const std::string stem = "motion" + std::to_string(m) + "_seed" + std::to_string(seed);
      fs::create_directories(out);
      quamo::write_jsonl(motion.truth, (out / (stem + "_truth.jsonl")).string());
      quamo::write_jsonl(motion.reference, (out / (stem + "_reference.jsonl")).string());
    }
  }
  std::cout << "wrote " << c.motions.size() * c.seeds.size() << " truth/reference pairs to " << out.string() << '\n';
  return 0;
}

int cmd_simulate(const Common& o) {
  const quamo::RunConfig c = load(o);
  const quamo::Simulation sim = quamo::simulate(c);
  const nlohmann::json report = quamo::to_json(sim);
  if (!o.out.empty()) {
    const fs::path out(o.out);
    for (const auto& r : sim.runs) {
      const fs::path dir = out / ("seed_" + std::to_string(r.seed)) / ("motion_" + std::to_string(r.motion));
      fs::create_directories(dir);
      quamo::write_jsonl(r.result.predicted, (dir / "trajectory.jsonl").string());
      nlohmann::json run = quamo::run_json(r);
      run["config"] = report["config"];
      write_text(dir / "report.json", run.dump(2) + "\n");
      write_text(dir / "errors.csv", quamo::errors_csv(r.result, c.dt));
    }
    write_text(out / "summary.json", report.dump(2) + "\n");
    write_text(out / "runs.csv", runs_csv(sim));
  }
  if (o.format == "json") std::cout << report.dump(2) << '\n';
  else if (o.format == "csv") std::cout << runs_csv(sim);
  else std::cout << quamo::summary_table(sim.summary);
  return 0;
}

int cmd_ablate(const Common& o) {
  const quamo::RunConfig c = load(o);
  const auto rows = quamo::ablate(c);
  const std::string table = quamo::ablation_table(rows);
  const std::string csv = quamo::ablation_csv(rows);
  const nlohmann::json j = {{"config", quamo::to_json(c)}, {"rows", quamo::to_json(rows)}};
  if (!o.out.empty()) {
    const fs::path out(o.out);
    write_text(out / "ablation.txt", table);
    write_text(out / "ablation.csv", csv);
    write_text(out / "ablation.json", j.dump(2) + "\n");
    for (const auto& row : rows) {
      for (const auto& r : row.runs) {
        const std::string name = std::string(quamo::to_string(row.representation)) + "_f" + std::to_string(row.bias) +
                                 "_s" + std::to_string(row.exact) + "_a" + std::to_string(row.enhancement) +
                                 "_motion" + std::to_string(r.motion) + "_seed" + std::to_string(r.seed) + ".csv";
        write_text(out / "errors" / name, quamo::errors_csv(r.result, c.dt));
      }
    }
  }
  if (o.format == "json") std::cout << j.dump(2) << '\n';
  else if (o.format == "csv") std::cout << csv;
  else std::cout << table;
  return 0;
}

int cmd_metrics(const std::string& pred_path, const std::string& gt_path, const std::string& skeleton,
                const Common& o) {
  const quamo::MotionSequence pred = quamo::read_jsonl(pred_path);
  const quamo::MotionSequence gt = quamo::read_jsonl(gt_path);
  if (pred.size() != gt.size()) {
    throw quamo::DomainError("metrics: prediction has " + std::to_string(pred.size()) + " frames, ground truth has " +
                             std::to_string(gt.size()));
  }
  const quamo::Skeleton skel = skeleton.empty() ? quamo::default_skeleton() : quamo::load_skeleton(skeleton);
  const quamo::MetricReport r =
      quamo::evaluate_metrics(quamo::keypoints(pred, skel), quamo::keypoints(gt, skel), skel);
  const std::string json = quamo::to_json(r).dump(2) + "\n";
  const std::string table = quamo::to_table(r);
  if (!o.out.empty()) {
    write_text(fs::path(o.out) / "metrics.json", json);
    write_text(fs::path(o.out) / "metrics.txt", table);
  }
  if (o.format == "json") std::cout << json;
  else if (o.format == "csv") {
    std::printf("mpjpe,p_mpjpe,accel,g_mpjpe,gre,g_accel,fs\n%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.mpjpe, r.p_mpjpe,
                r.accel, r.g_mpjpe, r.gre, r.g_accel, r.fs);
  } else std::cout << table;
  return 0;
}

int cmd_tune(const Common& o) {
  const quamo::RunConfig c = load(o);
  const quamo::TuneResult r = quamo::tune_gains(c);
  const nlohmann::json j = {{"config", quamo::to_json(c)}, {"result", quamo::to_json(r)}};
  if (!o.out.empty()) write_text(fs::path(o.out) / "tune.json", j.dump(2) + "\n");
  if (o.format == "json") std::cout << j.dump(2) << '\n';
  else if (o.format == "csv") std::printf("kp,kd,ka,loss\n%.9g,%.9g,%.9g,%.9g\n", r.best.kp, r.best.kd, r.best.ka, r.loss);
  else std::printf("kp %.4f  kd %.4f  ka %.4f  loss %.9g\n", r.best.kp, r.best.kd, r.best.ka, r.loss);
  return 0;
}

void add_common(CLI::App* sub, Common& o, bool config = true) {
  if (config) sub->add_option("--config", o.config, "run configuration (JSON)");
  sub->add_option("--seed", o.seeds, "seed list, e.g. 0,1,2 (overrides the config)");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"json", "csv", "table"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quamo: quaternion motion tracking experiments"};
  app.require_subcommand(1);

  Common gen_o, sim_o, abl_o, met_o, tune_o;
  std::string weights, pred, gt, skeleton;

  auto* gen = app.add_subcommand("gen", "generate synthetic motions or control-net weights");
  add_common(gen, gen_o);
  gen->add_option("--weights", weights, "write seeded control-net weights to this file instead");
  auto* sim = app.add_subcommand("simulate", "track every motion/seed and score it");
  add_common(sim, sim_o);
  auto* abl = app.add_subcommand("ablate", "run the rotation-representation and component ablation");
  add_common(abl, abl_o);
  auto* met = app.add_subcommand("metrics", "score a predicted motion file against ground truth");
  met->add_option("pred", pred, "predicted motion (JSON lines)")->required();
  met->add_option("gt", gt, "ground-truth motion (JSON lines)")->required();
  met->add_option("--skeleton", skeleton, "skeleton file (default: built-in 24 joints)");
  add_common(met, met_o, false);
  auto* tune = app.add_subcommand("tune", "search constant gains minimizing the training loss");
  add_common(tune, tune_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(gen_o, weights);
    if (*sim) return cmd_simulate(sim_o);
    if (*abl) return cmd_ablate(abl_o);
    if (*met) return cmd_metrics(pred, gt, skeleton, met_o);
    if (*tune) return cmd_tune(tune_o);
  } catch (const quamo::DivergenceError& e) {
    std::cerr << "error: numeric divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const quamo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
