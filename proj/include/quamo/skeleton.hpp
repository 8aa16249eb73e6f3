#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quamo/quaternion.hpp"

namespace quamo {

struct SkeletonJoint {
  std::string name;
  int parent{-1};
  Vec3 offset{Vec3::Zero()};  // from the parent joint, rest pose, meters
  bool end_effector{false};

  bool operator==(const SkeletonJoint&) const = default;
};

/// Joint hierarchy with rest-pose bone offsets.
///
/// Joints are topologically sorted: index 0 is the only root and every parent
/// index is smaller than its child's.
class Skeleton {
 public:
  Skeleton() = default;
  explicit Skeleton(std::vector<SkeletonJoint> joints) : joints_{std::move(joints)} { validate(); }

  std::size_t size() const { return joints_.size(); }
  const SkeletonJoint& operator[](std::size_t i) const { return joints_[i]; }
  const std::vector<SkeletonJoint>& joints() const { return joints_; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < joints_.size(); ++i)
      if (joints_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  /// End effectors whose name contains "foot".
  std::vector<std::size_t> feet() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < joints_.size(); ++i)
      if (joints_[i].end_effector && joints_[i].name.find("foot") != std::string::npos) out.push_back(i);
    return out;
  }

  double bone_length(std::size_t joint) const { return joints_.at(joint).offset.norm(); }

  bool operator==(const Skeleton&) const = default;

 private:
  void validate() const {
    if (joints_.empty()) throw ConfigError("skeleton: no joints");
    const int n = static_cast<int>(joints_.size());
    for (int i = 0; i < n; ++i) {
      const auto& j = joints_[static_cast<std::size_t>(i)];
      const std::string who = "skeleton: joint '" + j.name + "' (index " + std::to_string(i) + ")";
      if (i == 0) {
        if (j.parent != -1) throw ConfigError(who + " must be the root (parent -1)");
        continue;
      }
      if (j.parent == -1) throw ConfigError(who + " is a second root; only index 0 may have parent -1");
      if (j.parent < -1 || j.parent >= n) throw ConfigError(who + " has out-of-range parent " + std::to_string(j.parent));
    }
    // Cycles first so the message names the loop rather than the ordering.
    for (int i = 1; i < n; ++i) {
      int cursor = i;
      for (int steps = 0; cursor != 0; ++steps) {
        if (steps > n) {
          throw ConfigError("skeleton: joint '" + joints_[static_cast<std::size_t>(i)].name +
                            "' is part of a parent cycle");
        }
        cursor = joints_[static_cast<std::size_t>(cursor)].parent;
      }
    }
    for (int i = 1; i < n; ++i) {
      const auto& j = joints_[static_cast<std::size_t>(i)];
      if (j.parent >= i) {
        throw ConfigError("skeleton: joint '" + j.name + "' (index " + std::to_string(i) + ") has parent " +
                          std::to_string(j.parent) + " which does not precede it");
      }
      if (!j.offset.allFinite() || !(j.offset.norm() > 0.0)) {
        throw ConfigError("skeleton: joint '" + j.name + "' has a non-positive bone length");
      }
    }
  }

  std::vector<SkeletonJoint> joints_;
};

inline nlohmann::json to_json(const Skeleton& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& j : s.joints()) {
    arr.push_back({{"name", j.name},
                   {"parent", j.parent},
                   {"offset", {j.offset.x(), j.offset.y(), j.offset.z()}},
                   {"end_effector", j.end_effector}});
  }
  return arr;
}

inline Skeleton parse_skeleton(const nlohmann::json& arr) {
  if (!arr.is_array()) throw ConfigError("skeleton: expected a JSON array of joints");
  std::vector<SkeletonJoint> joints;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& e = arr[i];
    try {
      SkeletonJoint j;
      j.name = e.at("name").get<std::string>();
      j.parent = e.at("parent").get<int>();
      const auto off = e.value("offset", std::vector<double>{0.0, 0.0, 0.0});
      if (off.size() != 3) throw ConfigError("skeleton: joint '" + j.name + "' offset must have 3 entries");
      j.offset = Vec3(off[0], off[1], off[2]);
      j.end_effector = e.value("end_effector", false);
      joints.push_back(std::move(j));
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError("skeleton: entry " + std::to_string(i) + ": " + ex.what());
    }
  }
  return Skeleton(std::move(joints));
}

inline Skeleton load_skeleton(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open skeleton file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("skeleton file '" + path + "': " + e.what());
  }
  return parse_skeleton(j);
}

inline void save_skeleton(const Skeleton& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write skeleton file '" + path + "'");
  out << to_json(s).dump(2) << '\n';
}

/// 24-joint humanoid, z up, x forward, y left. Same content as
/// data/skeleton_smpl24.json. With the root at height 0.95 m the feet rest
/// 20 mm above the ground plane.
inline const char* default_skeleton_json() {
  return R"([
  {"name": "pelvis", "parent": -1, "offset": [0.0, 0.0, 0.0], "end_effector": false},
  {"name": "left_hip", "parent": 0, "offset": [0.0, 0.09, -0.09], "end_effector": false},
  {"name": "right_hip", "parent": 0, "offset": [0.0, -0.09, -0.09], "end_effector": false},
  {"name": "spine1", "parent": 0, "offset": [0.0, 0.0, 0.11], "end_effector": false},
  {"name": "left_knee", "parent": 1, "offset": [0.0, 0.01, -0.38], "end_effector": false},
  {"name": "right_knee", "parent": 2, "offset": [0.0, -0.01, -0.38], "end_effector": false},
  {"name": "spine2", "parent": 3, "offset": [0.0, 0.0, 0.13], "end_effector": false},
  {"name": "left_ankle", "parent": 4, "offset": [0.0, 0.0, -0.40], "end_effector": false},
  {"name": "right_ankle", "parent": 5, "offset": [0.0, 0.0, -0.40], "end_effector": false},
  {"name": "spine3", "parent": 6, "offset": [0.0, 0.0, 0.05], "end_effector": false},
  {"name": "left_foot", "parent": 7, "offset": [0.12, 0.0, -0.06], "end_effector": true},
  {"name": "right_foot", "parent": 8, "offset": [0.12, 0.0, -0.06], "end_effector": true},
  {"name": "neck", "parent": 9, "offset": [0.0, 0.0, 0.21], "end_effector": false},
  {"name": "left_collar", "parent": 9, "offset": [0.0, 0.08, 0.12], "end_effector": false},
  {"name": "right_collar", "parent": 9, "offset": [0.0, -0.08, 0.12], "end_effector": false},
  {"name": "head", "parent": 12, "offset": [0.02, 0.0, 0.09], "end_effector": true},
  {"name": "left_shoulder", "parent": 13, "offset": [0.0, 0.12, 0.03], "end_effector": false},
  {"name": "right_shoulder", "parent": 14, "offset": [0.0, -0.12, 0.03], "end_effector": false},
  {"name": "left_elbow", "parent": 16, "offset": [0.0, 0.26, 0.0], "end_effector": false},
  {"name": "right_elbow", "parent": 17, "offset": [0.0, -0.26, 0.0], "end_effector": false},
  {"name": "left_wrist", "parent": 18, "offset": [0.0, 0.25, 0.0], "end_effector": false},
  {"name": "right_wrist", "parent": 19, "offset": [0.0, -0.25, 0.0], "end_effector": false},
  {"name": "left_hand", "parent": 20, "offset": [0.0, 0.08, 0.0], "end_effector": true},
  {"name": "right_hand", "parent": 21, "offset": [0.0, -0.08, 0.0], "end_effector": true}
])";
}

inline Skeleton default_skeleton() { return parse_skeleton(nlohmann::json::parse(default_skeleton_json())); }

/// Bone b (child joint b + 1) gets length rest * (1 + scales[b]).
inline Skeleton apply_shape(const Skeleton& s, const std::vector<double>& scales) {
  if (scales.size() + 1 != s.size()) {
    throw DomainError("apply_shape: expected " + std::to_string(s.size() - 1) + " bone scales, got " +
                      std::to_string(scales.size()));
  }
  std::vector<SkeletonJoint> joints = s.joints();
  for (std::size_t b = 0; b < scales.size(); ++b) {
    if (!std::isfinite(scales[b]) || scales[b] <= -1.0) {
      throw DomainError("apply_shape: scale " + std::to_string(scales[b]) + " for bone of joint '" +
                        joints[b + 1].name + "' must be > -1");
    }
    joints[b + 1].offset *= 1.0 + scales[b];
  }
  return Skeleton(std::move(joints));
}

/// Per-joint local rotations plus root translation.
struct PoseFrame {
  std::vector<Quaterniond> joints;
  Vec3 root{Vec3::Zero()};

  bool operator==(const PoseFrame& o) const { return joints == o.joints && root == o.root; }
};

using KeypointFrame = std::vector<Vec3>;

/// World joint positions. Joint 0 sits at the root translation.
inline KeypointFrame forward_kinematics(const PoseFrame& pose, const Skeleton& skel) {
  if (pose.joints.size() != skel.size()) {
    throw DomainError("forward_kinematics: pose has " + std::to_string(pose.joints.size()) +
                      " joints, skeleton has " + std::to_string(skel.size()));
  }
  const std::size_t n = skel.size();
  std::vector<Quaterniond> world(n);
  KeypointFrame pos(n);
  world[0] = pose.joints[0];
  pos[0] = pose.root;
  for (std::size_t j = 1; j < n; ++j) {
    const auto p = static_cast<std::size_t>(skel[j].parent);
    world[j] = hamilton(world[p], pose.joints[j]);
    pos[j] = pos[p] + rotate(world[p], skel[j].offset);
  }
  return pos;
}

}  // namespace quamo
