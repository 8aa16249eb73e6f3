#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "quamo/synth.hpp"

namespace quamo {

// One frame per line: {"t": seconds, "joints": [[w,x,y,z], ...], "root": [x,y,z]}

inline void write_jsonl(const MotionSequence& seq, std::ostream& out) {
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    const auto& f = seq.frames[k];
    nlohmann::json joints = nlohmann::json::array();
    for (const auto& q : f.joints) joints.push_back({q.w, q.x, q.y, q.z});
    const nlohmann::json line = {{"t", static_cast<double>(k) * seq.dt},
                                 {"joints", std::move(joints)},
                                 {"root", {f.root.x(), f.root.y(), f.root.z()}}};
    out << line.dump() << '\n';
  }
}

inline void write_jsonl(const MotionSequence& seq, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write motion file '" + path + "'");
  write_jsonl(seq, out);
}

inline constexpr double kReadUnitTolerance = 1e-6;

/// Reads frames and infers dt from the first two timestamps.
inline MotionSequence read_jsonl(std::istream& in, const std::string& name = "<stream>") {
  MotionSequence seq;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> times;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      PoseFrame f;
      for (const auto& entry : j.at("joints")) {
        const auto c = entry.get<std::vector<double>>();
        if (c.size() != 4) throw ConfigError(where + ": joint quaternions need 4 components");
        const Quaterniond q(c[0], c[1], c[2], c[3]);
        if (!(std::abs(q.norm() - 1.0) <= kReadUnitTolerance))
          throw ConfigError(where + ": joint " + std::to_string(f.joints.size()) + " is not a unit quaternion (norm " +
                            std::to_string(q.norm()) + ")");
        f.joints.push_back(q);
      }
      const auto r = j.at("root").get<std::vector<double>>();
      if (r.size() != 3) throw ConfigError(where + ": root needs 3 components");
      f.root = Vec3(r[0], r[1], r[2]);
      if (!seq.frames.empty() && f.joints.size() != seq.frames.front().joints.size()) {
        throw ConfigError(where + ": joint count " + std::to_string(f.joints.size()) + " differs from first frame (" +
                          std::to_string(seq.frames.front().joints.size()) + ")");
      }
      times.push_back(j.value("t", 0.0));
      seq.frames.push_back(std::move(f));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (seq.frames.empty()) throw ConfigError(name + ": no frames");
  if (times.size() >= 2) {
    seq.dt = times[1] - times[0];
    if (!(seq.dt > 0.0)) throw ConfigError(name + ": timestamps must increase");
  }
  return seq;
}

inline MotionSequence read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open motion file '" + path + "'");
  return read_jsonl(in, path);
}

}  // namespace quamo
