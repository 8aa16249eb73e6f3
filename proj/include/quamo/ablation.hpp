#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "quamo/runner.hpp"

namespace quamo {

struct AblationRow {
  std::string method;  // "PD only" or "QuaMo"
  Representation representation{Representation::quaternion};
  bool bias{false};
  bool exact{false};
  bool enhancement{false};
  bool diverged{false};
  std::string diagnosis;  // divergence message when diverged
  Aggregate summary;
  std::vector<RunRecord> runs;
};

/// The seven tracker variants, in declaration order:
/// PD-only Euler XYZ, Euler ZXY, axis-angle, quaternion, then the quaternion
/// tracker with bias, + exact S^3 integration, + reference enhancement.
inline std::vector<AblationRow> ablation_rows() {
  auto row = [](const char* method, Representation r, bool bias, bool exact, bool enhancement) {
    AblationRow a;
    a.method = method;
    a.representation = r;
    a.bias = bias;
    a.exact = exact;
    a.enhancement = enhancement;
    return a;
  };
  return {
      row("PD only", Representation::euler_xyz, false, false, false),
      row("PD only", Representation::euler_zxy, false, false, false),
      row("PD only", Representation::axis_angle, false, false, false),
      row("PD only", Representation::quaternion, false, false, false),
      row("QuaMo", Representation::quaternion, true, false, false),
      row("QuaMo", Representation::quaternion, true, true, false),
      row("QuaMo", Representation::quaternion, true, true, true),
  };
}

inline RunConfig row_config(const RunConfig& base, const AblationRow& row) {
  RunConfig c = base;
  c.representation = row.representation;
  c.bias = row.bias;
  c.exact = row.exact;
  c.enhancement = row.enhancement;
  return c;
}

/// Runs every row on identical motions and seeds. Rows are returned ranked by
/// mean MPJPE, diverged rows last.
inline std::vector<AblationRow> ablate(const RunConfig& base) {
  std::vector<AblationRow> rows = ablation_rows();
  for (auto& row : rows) {
    try {
      const Simulation sim = simulate(row_config(base, row));
      row.summary = sim.summary;
      row.runs = sim.runs;
    } catch (const DivergenceError& e) {
      row.diverged = true;
      row.diagnosis = e.what();
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) {
    if (a.diverged != b.diverged) return !a.diverged;
    return a.summary.mpjpe.mean < b.summary.mpjpe.mean;
  });
  return rows;
}

inline const char* rotation_label(Representation r) {
  switch (r) {
    case Representation::quaternion: return "Quaternion";
    case Representation::euler_xyz: return "Euler XYZ";
    case Representation::euler_zxy: return "Euler ZXY";
    case Representation::axis_angle: return "Axis-angle";
  }
  return "?";
}

inline std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-8s %-11s %-3s %-3s %-3s %16s %16s %16s %16s %16s %16s %16s %16s\n", "Method",
                "Rotation", "f_w", "S3", "a", "MPJPE", "P-MPJPE", "Accel", "G-MPJPE", "G-Accel", "FS", "GRE",
                "MaxErr[rad]");
  out += buf;
  auto mark = [](bool b) { return b ? "x" : "-"; };
  for (const auto& r : rows) {
    if (r.diverged) {
      std::snprintf(buf, sizeof buf, "%-8s %-11s %-3s %-3s %-3s diverged: %s\n", r.method.c_str(),
                    rotation_label(r.representation), mark(r.bias), mark(r.exact), mark(r.enhancement),
                    r.diagnosis.c_str());
    } else {
      const auto& a = r.summary;
      std::snprintf(buf, sizeof buf, "%-8s %-11s %-3s %-3s %-3s %16s %16s %16s %16s %16s %16s %16s %16s\n",
                    r.method.c_str(), rotation_label(r.representation), mark(r.bias), mark(r.exact),
                    mark(r.enhancement), format_stat(a.mpjpe).c_str(), format_stat(a.p_mpjpe).c_str(),
                    format_stat(a.accel).c_str(), format_stat(a.g_mpjpe).c_str(), format_stat(a.g_accel).c_str(),
                    format_stat(a.fs).c_str(), format_stat(a.gre).c_str(), format_stat(a.max_error).c_str());
    }
    out += buf;
  }
  return out;
}

inline std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out =
      "method,rotation,f_omega,s3,alpha,diverged,mpjpe_mean,mpjpe_std,p_mpjpe_mean,p_mpjpe_std,accel_mean,accel_std,"
      "g_mpjpe_mean,g_mpjpe_std,g_accel_mean,g_accel_std,fs_mean,fs_std,gre_mean,gre_std,max_error_mean,"
      "max_error_std,final_error_mean,final_error_std\n";
  char buf[1024];
  for (const auto& r : rows) {
    const auto& a = r.summary;
    std::snprintf(buf, sizeof buf,
                  "%s,%s,%d,%d,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                  "%.9g,%.9g\n",
                  r.method.c_str(), to_string(r.representation), r.bias, r.exact, r.enhancement, r.diverged,
                  a.mpjpe.mean, a.mpjpe.std, a.p_mpjpe.mean, a.p_mpjpe.std, a.accel.mean, a.accel.std, a.g_mpjpe.mean,
                  a.g_mpjpe.std, a.g_accel.mean, a.g_accel.std, a.fs.mean, a.fs.std, a.gre.mean, a.gre.std,
                  a.max_error.mean, a.max_error.std, a.final_error.mean, a.final_error.std);
    out += buf;
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<AblationRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = {{"method", r.method},
                          {"rotation", to_string(r.representation)},
                          {"f_omega", r.bias},
                          {"s3", r.exact},
                          {"alpha", r.enhancement},
                          {"diverged", r.diverged}};
    if (r.diverged) row["diagnosis"] = r.diagnosis;
    else row["aggregate"] = to_json(r.summary);
    arr.push_back(std::move(row));
  }
  return arr;
}

}  // namespace quamo
