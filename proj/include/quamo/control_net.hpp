#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quamo/controller.hpp"
#include "quamo/random.hpp"

namespace quamo {

/// Everything the gain policy sees at one frame.
struct PolicyInput {
  const std::vector<JointState>* joints{nullptr};
  const std::vector<Quaterniond>* reference{nullptr};
  RootState root{};
  Vec3 root_reference{Vec3::Zero()};
};

struct PolicyOutput {
  std::vector<Gains> joints;
  RootGains root;
  bool has_bias{false};  // true when `Gains::bias` carries a learned estimate
};

class GainPolicy {
 public:
  virtual ~GainPolicy() = default;
  virtual PolicyOutput evaluate(const PolicyInput& in) const = 0;
};

/// The same gains for every joint and every frame.
class ConstantGainPolicy final : public GainPolicy {
 public:
  ConstantGainPolicy(Gains joint, RootGains root) : joint_{std::move(joint)}, root_{root} {}

  PolicyOutput evaluate(const PolicyInput& in) const override {
    PolicyOutput out;
    out.joints.assign(in.joints != nullptr ? in.joints->size() : 0, joint_);
    out.root = root_;
    return out;
  }

  const Gains& joint_gains() const { return joint_; }
  const RootGains& root_gains() const { return root_; }

 private:
  Gains joint_;
  RootGains root_;
};

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double leaky_relu(double x, double slope = 0.01) { return x >= 0.0 ? x : slope * x; }

/// Gain-prediction network.
///
/// input (11 N + 9) -> [Linear(hidden) -> LayerNorm -> LeakyReLU] x 2 -> heads.
/// Heads: kp, kd, ka (N each, sigmoid-scaled), bias (3N, linear),
/// root_kp, root_kd (1 each, sigmoid-scaled). Layer names and the input
/// layout are listed in docs/formats.md.
class ControlNet {
 public:
  struct Linear {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;
  };
  struct Norm {
    Eigen::VectorXd weight;
    Eigen::VectorXd bias;
  };

  static constexpr std::size_t kDefaultJoints = 24;
  static constexpr std::size_t kDefaultHidden = 512;
  static constexpr double kLayerNormEps = 1e-5;
  static constexpr double kLeakySlope = 0.01;

  static constexpr std::size_t input_width(std::size_t joints) { return 11 * joints + 9; }

  ControlNet() = default;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases, unit
  /// LayerNorm scale, zero LayerNorm shift.
  static ControlNet from_seed(std::uint64_t seed, std::size_t joints = kDefaultJoints,
                              std::size_t hidden = kDefaultHidden, GainScales scales = {}) {
    ControlNet net;
    net.joints_ = joints;
    net.hidden_ = hidden;
    net.scales_ = scales;
    Rng rng(seed, 0x6e6574);
    auto linear = [&](std::size_t out, std::size_t in) {
      Linear l;
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      // Drawn in row-major order.
      std::vector<double> w(out * in);
      for (double& v : w) v = rng.uniform(-bound, bound);
      l.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          w.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
      l.bias.resize(static_cast<Eigen::Index>(out));
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = rng.uniform(-bound, bound);
      return l;
    };
    auto norm = [&](std::size_t n) {
      return Norm{Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)),
                  Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};
    };
    net.block_[0] = linear(hidden, input_width(joints));
    net.norm_[0] = norm(hidden);
    net.block_[1] = linear(hidden, hidden);
    net.norm_[1] = norm(hidden);
    net.head_kp_ = linear(joints, hidden);
    net.head_kd_ = linear(joints, hidden);
    net.head_ka_ = linear(joints, hidden);
    net.head_bias_ = linear(3 * joints, hidden);
    net.head_root_kp_ = linear(1, hidden);
    net.head_root_kd_ = linear(1, hidden);
    return net;
  }

  std::size_t joints() const { return joints_; }
  std::size_t hidden() const { return hidden_; }
  const GainScales& scales() const { return scales_; }

  Linear& block(int i) { return block_[i]; }
  Norm& norm(int i) { return norm_[i]; }
  Linear& head_kp() { return head_kp_; }
  Linear& head_kd() { return head_kd_; }
  Linear& head_ka() { return head_ka_; }
  Linear& head_bias() { return head_bias_; }
  Linear& head_root_kp() { return head_root_kp_; }
  Linear& head_root_kd() { return head_root_kd_; }

  /// Concatenates q (w,x,y,z per joint), omega, q_ref, r, v, r_ref.
  static Eigen::VectorXd assemble_input(const std::vector<JointState>& joints,
                                        const std::vector<Quaterniond>& reference, const RootState& root,
                                        const Vec3& root_reference) {
    if (joints.size() != reference.size()) {
      throw DomainError("ControlNet: state and reference joint counts differ");
    }
    const std::size_t n = joints.size();
    Eigen::VectorXd x(static_cast<Eigen::Index>(input_width(n)));
    Eigen::Index k = 0;
    for (const auto& j : joints) {
      x(k++) = j.q.w; x(k++) = j.q.x; x(k++) = j.q.y; x(k++) = j.q.z;
    }
    for (const auto& j : joints) {
      x(k++) = j.omega.x(); x(k++) = j.omega.y(); x(k++) = j.omega.z();
    }
    for (const auto& q : reference) {
      x(k++) = q.w; x(k++) = q.x; x(k++) = q.y; x(k++) = q.z;
    }
    for (const Vec3* v : {&root.position, &root.velocity, &root_reference}) {
      x(k++) = v->x(); x(k++) = v->y(); x(k++) = v->z();
    }
    return x;
  }

  /// Raw forward pass: returns the embedding after both blocks.
  Eigen::VectorXd embed(const Eigen::VectorXd& input) const {
    if (static_cast<std::size_t>(input.size()) != input_width(joints_)) {
      throw DomainError("ControlNet: input width " + std::to_string(input.size()) + ", expected " +
                        std::to_string(input_width(joints_)));
    }
    Eigen::VectorXd h = input;
    for (int b = 0; b < 2; ++b) {
      h = block_[b].weight * h + block_[b].bias;
      const double mean = h.mean();
      const double var = (h.array() - mean).square().mean();
      h = ((h.array() - mean) / std::sqrt(var + kLayerNormEps)).matrix();
      h = h.cwiseProduct(norm_[b].weight) + norm_[b].bias;
      h = h.unaryExpr([](double v) { return leaky_relu(v, kLeakySlope); });
    }
    return h;
  }

  /// Flat output: [kp(N), kd(N), ka(N), bias(3N), root_kp, root_kd], gains already scaled.
  Eigen::VectorXd forward(const Eigen::VectorXd& input) const {
    const Eigen::VectorXd h = embed(input);
    const auto n = static_cast<Eigen::Index>(joints_);
    Eigen::VectorXd out(6 * n + 2);
    auto scaled = [&](const Linear& head, double scale) -> Eigen::VectorXd {
      Eigen::VectorXd raw = head.weight * h + head.bias;
      return raw.unaryExpr([scale](double v) { return sigmoid(v) * scale; });
    };
    out.segment(0, n) = scaled(head_kp_, scales_.kp);
    out.segment(n, n) = scaled(head_kd_, scales_.kd);
    out.segment(2 * n, n) = scaled(head_ka_, scales_.ka);
    out.segment(3 * n, 3 * n) = head_bias_.weight * h + head_bias_.bias;
    out(6 * n) = scaled(head_root_kp_, scales_.root_kp)(0);
    out(6 * n + 1) = scaled(head_root_kd_, scales_.root_kd)(0);
    return out;
  }

  PolicyOutput unpack(const Eigen::VectorXd& out) const {
    PolicyOutput p;
    const auto n = static_cast<Eigen::Index>(joints_);
    p.joints.resize(joints_);
    for (Eigen::Index j = 0; j < n; ++j) {
      auto& g = p.joints[static_cast<std::size_t>(j)];
      g.kp = out(j);
      g.kd = out(n + j);
      g.ka = out(2 * n + j);
      g.bias = out.segment<3>(3 * n + 3 * j);
    }
    p.root = {out(6 * n), out(6 * n + 1)};
    p.has_bias = true;
    return p;
  }

  // -- weight file ----------------------------------------------------------

  static std::vector<std::string> layer_names() {
    return {"block0.linear", "block0.norm", "block1.linear", "block1.norm", "head_kp",
            "head_kd",       "head_ka",     "head_bias",     "head_root_kp", "head_root_kd"};
  }

  nlohmann::json to_json() const {
    nlohmann::json layers = nlohmann::json::object();
    auto put_linear = [&](const std::string& name, const Linear& l) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(l.weight.cols()));
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) row[static_cast<std::size_t>(c)] = l.weight(r, c);
        rows.push_back(std::move(row));
      }
      layers[name + ".weight"] = std::move(rows);
      layers[name + ".bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    };
    auto put_norm = [&](const std::string& name, const Norm& n) {
      layers[name + ".weight"] = std::vector<double>(n.weight.data(), n.weight.data() + n.weight.size());
      layers[name + ".bias"] = std::vector<double>(n.bias.data(), n.bias.data() + n.bias.size());
    };
    put_linear("block0.linear", block_[0]);
    put_norm("block0.norm", norm_[0]);
    put_linear("block1.linear", block_[1]);
    put_norm("block1.norm", norm_[1]);
    put_linear("head_kp", head_kp_);
    put_linear("head_kd", head_kd_);
    put_linear("head_ka", head_ka_);
    put_linear("head_bias", head_bias_);
    put_linear("head_root_kp", head_root_kp_);
    put_linear("head_root_kd", head_root_kd_);
    return {{"input_dim", input_width(joints_)},
            {"hidden_dim", hidden_},
            {"joints", joints_},
            {"scales",
             {{"kp", scales_.kp}, {"kd", scales_.kd}, {"ka", scales_.ka},
              {"root_kp", scales_.root_kp}, {"root_kd", scales_.root_kd}}},
            {"layers", std::move(layers)}};
  }

  static ControlNet from_json(const nlohmann::json& j) {
    ControlNet net;
    try {
      net.joints_ = j.value("joints", kDefaultJoints);
      net.hidden_ = j.at("hidden_dim").get<std::size_t>();
      const auto input_dim = j.at("input_dim").get<std::size_t>();
      if (input_dim != input_width(net.joints_)) {
        throw ConfigError("weight file: input_dim " + std::to_string(input_dim) + " does not match " +
                          std::to_string(net.joints_) + " joints (expected " +
                          std::to_string(input_width(net.joints_)) + ")");
      }
      if (j.contains("scales")) {
        const auto& s = j["scales"];
        net.scales_.kp = s.value("kp", net.scales_.kp);
        net.scales_.kd = s.value("kd", net.scales_.kd);
        net.scales_.ka = s.value("ka", net.scales_.ka);
        net.scales_.root_kp = s.value("root_kp", net.scales_.root_kp);
        net.scales_.root_kd = s.value("root_kd", net.scales_.root_kd);
      }
      const auto& layers = j.at("layers");
      const std::size_t n = net.joints_, h = net.hidden_;
      net.block_[0] = read_linear(layers, "block0.linear", h, input_dim);
      net.norm_[0] = read_norm(layers, "block0.norm", h);
      net.block_[1] = read_linear(layers, "block1.linear", h, h);
      net.norm_[1] = read_norm(layers, "block1.norm", h);
      net.head_kp_ = read_linear(layers, "head_kp", n, h);
      net.head_kd_ = read_linear(layers, "head_kd", n, h);
      net.head_ka_ = read_linear(layers, "head_ka", n, h);
      net.head_bias_ = read_linear(layers, "head_bias", 3 * n, h);
      net.head_root_kp_ = read_linear(layers, "head_root_kp", 1, h);
      net.head_root_kd_ = read_linear(layers, "head_root_kd", 1, h);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("weight file: ") + e.what());
    }
    return net;
  }

  static ControlNet load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open weight file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("weight file '" + path + "': " + e.what());
    }
    return from_json(j);
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write weight file '" + path + "'");
    out << to_json().dump();
  }

 private:
  static std::vector<double> read_vector(const nlohmann::json& layers, const std::string& key, std::size_t n) {
    auto v = layers.at(key).get<std::vector<double>>();
    if (v.size() != n) {
      throw ConfigError("weight file: '" + key + "' has " + std::to_string(v.size()) + " entries, expected " +
                        std::to_string(n));
    }
    return v;
  }

  static Linear read_linear(const nlohmann::json& layers, const std::string& name, std::size_t out,
                            std::size_t in) {
    const auto& rows = layers.at(name + ".weight");
    if (!rows.is_array() || rows.size() != out) {
      throw ConfigError("weight file: '" + name + ".weight' must have " + std::to_string(out) + " rows");
    }
    Linear l;
    l.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (std::size_t r = 0; r < out; ++r) {
      const auto row = rows[r].get<std::vector<double>>();
      if (row.size() != in) {
        throw ConfigError("weight file: '" + name + ".weight' row " + std::to_string(r) + " has " +
                          std::to_string(row.size()) + " columns, expected " + std::to_string(in));
      }
      for (std::size_t c = 0; c < in; ++c) l.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    const auto b = read_vector(layers, name + ".bias", out);
    l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    return l;
  }

  static Norm read_norm(const nlohmann::json& layers, const std::string& name, std::size_t n) {
    const auto w = read_vector(layers, name + ".weight", n);
    const auto b = read_vector(layers, name + ".bias", n);
    return {Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(n)),
            Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(n))};
  }

  std::size_t joints_{kDefaultJoints};
  std::size_t hidden_{kDefaultHidden};
  GainScales scales_{};
  Linear block_[2];
  Norm norm_[2];
  Linear head_kp_, head_kd_, head_ka_, head_bias_, head_root_kp_, head_root_kd_;
};

/// Gains predicted per frame by a ControlNet.
class NetGainPolicy final : public GainPolicy {
 public:
  explicit NetGainPolicy(ControlNet net) : net_{std::move(net)} {}

  PolicyOutput evaluate(const PolicyInput& in) const override {
    if (in.joints == nullptr || in.reference == nullptr) {
      throw DomainError("NetGainPolicy: missing state or reference");
    }
    if (in.joints->size() != net_.joints()) {
      throw DomainError("NetGainPolicy: network expects " + std::to_string(net_.joints()) + " joints, got " +
                        std::to_string(in.joints->size()));
    }
    const Eigen::VectorXd x = ControlNet::assemble_input(*in.joints, *in.reference, in.root, in.root_reference);
    return net_.unpack(net_.forward(x));
  }

  const ControlNet& net() const { return net_; }

 private:
  ControlNet net_;
};

}  // namespace quamo
