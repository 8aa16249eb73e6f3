#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "quamo/runner.hpp"

namespace quamo {

struct TuneCandidate {
  double kp{0.0};
  double kd{0.0};
  double loss{std::numeric_limits<double>::infinity()};  // mean L_total; inf when diverged
};

struct TuneResult {
  Gains best;
  double loss{std::numeric_limits<double>::infinity()};
  std::vector<TuneCandidate> evaluated;
};

/// Mean L_total of constant gains (kp, kd) over a motion suite.
inline double suite_loss(const std::vector<SynthMotion>& suite, const RunConfig& base, const Skeleton& skel,
                         double kp, double kd) {
  RunConfig c = base;
  c.gains.policy = PolicyKind::constant;
  c.gains.joint.kp = kp;
  c.gains.joint.kd = kd;
  const ConstantGainPolicy policy(c.gains.joint, c.gains.root);
  double sum = 0.0;
  try {
    for (const auto& m : suite) sum += simulate_motion(c, m, policy, skel).loss.total;
  } catch (const DivergenceError&) {
    return std::numeric_limits<double>::infinity();
  }
  return sum / static_cast<double>(suite.size());
}

/// Constant-gain search minimizing mean L_total over the suite. kp and kd are
/// searched; ka and the bias come from `base.gains`. Grid search walks the
/// value lists; random search draws `samples` points uniformly from the box
/// [0, 40] x [0, 30] with `tune.seed`.
inline TuneResult tune_gains(const std::vector<SynthMotion>& suite, const RunConfig& base) {
  if (suite.empty()) throw ConfigError("tune: the motion suite is empty");
  const Skeleton skel = resolve_skeleton(base);
  const GainScales scales;
  const TuneConfig& t = base.tune;

  std::vector<TuneCandidate> candidates;
  if (t.method == TuneConfig::Method::grid) {
    for (const double kp : t.kp_values)
      for (const double kd : t.kd_values) candidates.push_back({kp, kd});
  } else {
    Rng rng(t.seed, 0x74756e65);
    for (std::size_t i = 0; i < t.samples; ++i) {
      const double kp = rng.uniform(0.0, scales.kp);
      const double kd = rng.uniform(0.0, scales.kd);
      candidates.push_back({kp, kd});
    }
  }
  for (auto& cand : candidates) {
    if (cand.kp < 0 || cand.kp > scales.kp || cand.kd < 0 || cand.kd > scales.kd) {
      throw ConfigError("tune: candidate gains outside [0, 40] x [0, 30]");
    }
    cand.loss = suite_loss(suite, base, skel, cand.kp, cand.kd);
  }

  TuneResult r;
  r.evaluated = candidates;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best = std::min(best, c.loss);
  if (!std::isfinite(best)) throw DivergenceError("tune: every candidate diverged");
  const TuneCandidate* pick = nullptr;
  for (const auto& c : candidates) {
    if (!(c.loss <= best + t.tie_tolerance)) continue;
    if (pick == nullptr || c.kp < pick->kp || (c.kp == pick->kp && c.kd < pick->kd)) pick = &c;
  }
  r.best = base.gains.joint;
  r.best.kp = pick->kp;
  r.best.kd = pick->kd;
  r.loss = pick->loss;
  return r;
}

/// Suite built from every (motion, seed) pair of the config.
inline TuneResult tune_gains(const RunConfig& base) {
  std::vector<SynthMotion> suite;
  for (std::size_t m = 0; m < base.motions.size(); ++m)
    for (const auto seed : base.seeds) suite.push_back(motion_for(base, m, seed));
  return tune_gains(suite, base);
}

inline nlohmann::json to_json(const TuneResult& r) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : r.evaluated)
    cands.push_back({{"kp", c.kp}, {"kd", c.kd}, {"loss", std::isfinite(c.loss) ? nlohmann::json(c.loss) : nlohmann::json(nullptr)}});
  return {{"best", {{"kp", r.best.kp}, {"kd", r.best.kd}, {"ka", r.best.ka}}}, {"loss", r.loss}, {"evaluated", cands}};
}

}  // namespace quamo
