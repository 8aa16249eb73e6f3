#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quamo/skeleton.hpp"

namespace quamo {

/// frames x joints, meters, world frame.
using KeypointSequence = std::vector<KeypointFrame>;

/// All values in millimetres (per frame^2 for the acceleration errors) and
/// percent for foot skating.
struct MetricReport {
  double mpjpe{0.0};
  double p_mpjpe{0.0};
  double accel{0.0};
  double g_mpjpe{0.0};
  double gre{0.0};
  double g_accel{0.0};
  double fs{0.0};
};

struct ContactConfig {
  double height{0.05};        // contact when foot height < this, meters
  double displacement{0.02};  // horizontal slide threshold per frame, meters
  int up_axis{2};
};

namespace detail {
inline constexpr double kMm = 1000.0;

inline void require_same_shape(const KeypointSequence& a, const KeypointSequence& b, const char* what) {
  if (a.size() != b.size()) {
    throw DomainError(std::string(what) + ": sequence lengths differ (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + " frames)");
  }
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].size() != b[t].size()) {
      throw DomainError(std::string(what) + ": frame " + std::to_string(t) + " has " + std::to_string(a[t].size()) +
                        " vs " + std::to_string(b[t].size()) + " joints");
    }
    if (a[t].empty()) throw DomainError(std::string(what) + ": empty frame");
  }
  if (a.empty()) throw DomainError(std::string(what) + ": empty sequence");
}

inline KeypointFrame root_aligned(const KeypointFrame& f) {
  KeypointFrame out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) out[j] = f[j] - f[0];
  return out;
}

inline double mean_distance(const KeypointFrame& a, const KeypointFrame& b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += (a[j] - b[j]).norm();
  return sum / static_cast<double>(a.size());
}

inline Eigen::Matrix3Xd to_matrix(const KeypointFrame& f) {
  Eigen::Matrix3Xd m(3, static_cast<Eigen::Index>(f.size()));
  for (std::size_t j = 0; j < f.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = f[j];
  return m;
}
}  // namespace detail

/// Mean per-joint error after subtracting the root joint in every frame.
inline double mpjpe(const KeypointSequence& pred, const KeypointSequence& gt) {
  detail::require_same_shape(pred, gt, "mpjpe");
  double sum = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t)
    sum += detail::mean_distance(detail::root_aligned(pred[t]), detail::root_aligned(gt[t]));
  return detail::kMm * sum / static_cast<double>(pred.size());
}

/// Mean per-joint error without any alignment.
inline double g_mpjpe(const KeypointSequence& pred, const KeypointSequence& gt) {
  detail::require_same_shape(pred, gt, "g_mpjpe");
  double sum = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) sum += detail::mean_distance(pred[t], gt[t]);
  return detail::kMm * sum / static_cast<double>(pred.size());
}

/// Mean root-joint (index 0) position error.
inline double gre(const KeypointSequence& pred, const KeypointSequence& gt) {
  detail::require_same_shape(pred, gt, "gre");
  double sum = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) sum += (pred[t][0] - gt[t][0]).norm();
  return detail::kMm * sum / static_cast<double>(pred.size());
}

/// Rotation + translation that best maps `source` onto `target` (no scale).
struct RigidAlignment {
  Mat3 rotation{Mat3::Identity()};
  Vec3 translation{Vec3::Zero()};
  bool degenerate{false};  // fewer than three non-collinear target points
};

inline RigidAlignment procrustes(const KeypointFrame& source, const KeypointFrame& target) {
  const Eigen::Matrix3Xd s = detail::to_matrix(source);
  const Eigen::Matrix3Xd d = detail::to_matrix(target);
  const Vec3 mu_s = s.rowwise().mean();
  const Vec3 mu_d = d.rowwise().mean();
  const Eigen::Matrix3Xd sc = s.colwise() - mu_s;
  const Eigen::Matrix3Xd dc = d.colwise() - mu_d;

  RigidAlignment out;
  Eigen::JacobiSVD<Eigen::Matrix3Xd> spread(dc, Eigen::ComputeThinU);
  const auto sv = spread.singularValues();
  out.degenerate = source.size() < 3 || !(sv(1) > 1e-9 * std::max(sv(0), 1e-300));

  const Mat3 cov = dc * sc.transpose();
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 fix = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) fix(2, 2) = -1.0;
  out.rotation = svd.matrixU() * fix * svd.matrixV().transpose();
  out.translation = mu_d - out.rotation * mu_s;
  return out;
}

struct AlignedError {
  double value{0.0};  // mm
  std::vector<std::size_t> degenerate_frames;
};

/// MPJPE after a per-frame rigid (rotation + translation) alignment of pred onto gt.
inline AlignedError p_mpjpe_detailed(const KeypointSequence& pred, const KeypointSequence& gt) {
  detail::require_same_shape(pred, gt, "p_mpjpe");
  AlignedError out;
  double sum = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const RigidAlignment a = procrustes(pred[t], gt[t]);
    if (a.degenerate) out.degenerate_frames.push_back(t);
    KeypointFrame moved(pred[t].size());
    for (std::size_t j = 0; j < moved.size(); ++j) moved[j] = a.rotation * pred[t][j] + a.translation;
    sum += detail::mean_distance(moved, gt[t]);
  }
  out.value = detail::kMm * sum / static_cast<double>(pred.size());
  return out;
}

inline double p_mpjpe(const KeypointSequence& pred, const KeypointSequence& gt) {
  return p_mpjpe_detailed(pred, gt).value;
}

/// x[t] - 2 x[t+1] + x[t+2] for t in [0, T-2).
template <typename T>
std::vector<T> second_difference(const std::vector<T>& x) {
  std::vector<T> out;
  if (x.size() < 3) return out;
  out.reserve(x.size() - 2);
  for (std::size_t t = 0; t + 2 < x.size(); ++t) out.push_back(x[t] - 2.0 * x[t + 1] + x[t + 2]);
  return out;
}

/// Mean norm of the difference of second finite differences, mm/frame^2.
/// root_align = true gives Accel, false gives G-Accel.
inline double accel_err(const KeypointSequence& pred, const KeypointSequence& gt, bool root_align) {
  detail::require_same_shape(pred, gt, "accel_err");
  if (pred.size() < 3) {
    throw DomainError("accel_err: need at least 3 frames, got " + std::to_string(pred.size()));
  }
  const std::size_t joints = pred[0].size();
  double sum = 0.0;
  for (std::size_t t = 0; t + 2 < pred.size(); ++t) {
    for (std::size_t j = 0; j < joints; ++j) {
      auto at = [&](const KeypointSequence& s, std::size_t k) -> Vec3 {
        return root_align ? Vec3(s[k][j] - s[k][0]) : s[k][j];
      };
      const Vec3 ap = at(pred, t) - 2.0 * at(pred, t + 1) + at(pred, t + 2);
      const Vec3 ag = at(gt, t) - 2.0 * at(gt, t + 1) + at(gt, t + 2);
      sum += (ap - ag).norm();
    }
  }
  return detail::kMm * sum / static_cast<double>((pred.size() - 2) * joints);
}

/// Percentage of frames in which at least one foot in ground contact slides
/// horizontally more than the threshold since the previous frame.
inline double foot_skate(const KeypointSequence& pred, const Skeleton& skel, const ContactConfig& cfg = {}) {
  const auto feet = skel.feet();
  if (feet.empty()) throw DomainError("foot_skate: skeleton declares no foot end effectors");
  if (pred.empty()) throw DomainError("foot_skate: empty sequence");
  const int up = cfg.up_axis;
  std::size_t skating = 0;
  for (std::size_t t = 1; t < pred.size(); ++t) {
    bool skate = false;
    for (const std::size_t f : feet) {
      if (f >= pred[t].size()) throw DomainError("foot_skate: frame smaller than skeleton");
      if (!(pred[t][f](up) < cfg.height)) continue;
      Vec3 slide = pred[t][f] - pred[t - 1][f];
      slide(up) = 0.0;
      if (slide.norm() > cfg.displacement) skate = true;
    }
    if (skate) ++skating;
  }
  return 100.0 * static_cast<double>(skating) / static_cast<double>(pred.size());
}

inline MetricReport evaluate_metrics(const KeypointSequence& pred, const KeypointSequence& gt, const Skeleton& skel,
                                     const ContactConfig& contact = {}) {
  MetricReport r;
  r.mpjpe = mpjpe(pred, gt);
  r.p_mpjpe = p_mpjpe(pred, gt);
  r.accel = accel_err(pred, gt, true);
  r.g_mpjpe = g_mpjpe(pred, gt);
  r.gre = gre(pred, gt);
  r.g_accel = accel_err(pred, gt, false);
  r.fs = foot_skate(pred, skel, contact);
  return r;
}

// -- training objective ------------------------------------------------------

struct LossBreakdown {
  double local{0.0};
  double global{0.0};
  double beta{0.0};
  double total{0.0};
};

inline constexpr double kDefaultShapeWeight = 0.01;

/// L_local + L_global + lambda * |beta_fix|, in meters.
///
/// Keypoint terms use root-aligned positions; root terms use the root
/// translation (joint 0). Distances are L1 over xyz, averaged over frames
/// (and joints); the global part averages over the T - 2 second differences
/// and is zero for T < 3.
inline LossBreakdown loss_total(const KeypointSequence& pred, const KeypointSequence& gt,
                                const std::vector<double>& beta_fix, double lambda = kDefaultShapeWeight) {
  detail::require_same_shape(pred, gt, "loss_total");
  const std::size_t frames = pred.size();
  const std::size_t joints = pred[0].size();

  std::vector<KeypointFrame> pa(frames), ga(frames);
  std::vector<Vec3> pr(frames), gr(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    pa[t] = detail::root_aligned(pred[t]);
    ga[t] = detail::root_aligned(gt[t]);
    pr[t] = pred[t][0];
    gr[t] = gt[t][0];
  }
  auto keypoint_l1 = [&](const std::vector<KeypointFrame>& a, const std::vector<KeypointFrame>& b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t)
      for (std::size_t j = 0; j < joints; ++j) s += (a[t][j] - b[t][j]).lpNorm<1>();
    return a.empty() ? 0.0 : s / static_cast<double>(a.size() * joints);
  };
  auto root_l1 = [](const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += (a[t] - b[t]).lpNorm<1>();
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
  };
  auto second_diff_frames = [joints](const std::vector<KeypointFrame>& x) {
    std::vector<KeypointFrame> out;
    for (std::size_t t = 0; t + 2 < x.size(); ++t) {
      KeypointFrame f(joints);
      for (std::size_t j = 0; j < joints; ++j) f[j] = x[t][j] - 2.0 * x[t + 1][j] + x[t + 2][j];
      out.push_back(std::move(f));
    }
    return out;
  };

  LossBreakdown l;
  l.local = keypoint_l1(pa, ga) + root_l1(pr, gr);
  l.global = keypoint_l1(second_diff_frames(pa), second_diff_frames(ga)) +
             root_l1(second_difference(pr), second_difference(gr));
  double b2 = 0.0;
  for (const double b : beta_fix) b2 += b * b;
  l.beta = std::sqrt(b2);
  l.total = l.local + l.global + lambda * l.beta;
  return l;
}

// -- serialization -----------------------------------------------------------

inline nlohmann::json to_json(const MetricReport& r) {
  return {{"mpjpe_mm", r.mpjpe},     {"p_mpjpe_mm", r.p_mpjpe}, {"accel_mm_per_frame2", r.accel},
          {"g_mpjpe_mm", r.g_mpjpe}, {"gre_mm", r.gre},         {"g_accel_mm_per_frame2", r.g_accel},
          {"fs_percent", r.fs}};
}

inline MetricReport metric_report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.mpjpe = j.at("mpjpe_mm").get<double>();
  r.p_mpjpe = j.at("p_mpjpe_mm").get<double>();
  r.accel = j.at("accel_mm_per_frame2").get<double>();
  r.g_mpjpe = j.at("g_mpjpe_mm").get<double>();
  r.gre = j.at("gre_mm").get<double>();
  r.g_accel = j.at("g_accel_mm_per_frame2").get<double>();
  r.fs = j.at("fs_percent").get<double>();
  return r;
}

/// Two-line aligned table, fixed three decimals.
inline std::string to_table(const MetricReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%10s %10s %10s %10s %10s %10s %10s\n%10.3f %10.3f %10.3f %10.3f %10.3f %10.3f %10.3f\n",
                "MPJPE", "P-MPJPE", "Accel", "G-MPJPE", "GRE", "G-Accel", "FS", r.mpjpe, r.p_mpjpe, r.accel,
                r.g_mpjpe, r.gre, r.g_accel, r.fs);
  return buf;
}

}  // namespace quamo
