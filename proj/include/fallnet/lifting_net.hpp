#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fallnet/config.hpp"
#include "fallnet/nn/adam.hpp"
#include "fallnet/nn/block.hpp"
#include "fallnet/nn/loss.hpp"
#include "fallnet/normalization.hpp"

namespace fallnet {

struct LiftingConfig {
  std::size_t joints = kNumJoints;
  std::size_t hidden_width = 736;
  std::size_t blocks = 2;
  double dropout = 0.25;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;

  void validate() const {
    if (joints == 0 || hidden_width == 0 || blocks == 0) {
      fail(ErrorKind::config, "lifting config needs joints, hidden_width, blocks >= 1");
    }
  }

  KeyValues to_kv() const {
    KeyValues kv;
    kv.set("model", "lifting");
    kv.set("joints", joints);
    kv.set("hidden_width", hidden_width);
    kv.set("blocks", blocks);
    kv.set("dropout", dropout);
    kv.set("bn_momentum", bn_momentum);
    kv.set("bn_epsilon", bn_epsilon);
    return kv;
  }

  static LiftingConfig from_kv(const KeyValues& kv) {
    LiftingConfig c;
    c.joints = kv.get_number<std::size_t>("joints", c.joints);
    c.hidden_width = kv.get_number<std::size_t>("hidden_width", c.hidden_width);
    c.blocks = kv.get_number<std::size_t>("blocks", c.blocks);
    c.dropout = kv.get_number<double>("dropout", c.dropout);
    c.bn_momentum = kv.get_number<double>("bn_momentum", c.bn_momentum);
    c.bn_epsilon = kv.get_number<double>("bn_epsilon", c.bn_epsilon);
    c.validate();
    return c;
  }
};

// Maps one normalized 2D pose (2J values) to a root-relative 3D pose (3J).
// Poses travel as (B, 2J, 1) tensors so every layer is a kernel-1 conv:
//   in:     conv 2J->W, BN, ReLU, dropout
//   blocks: x + unit(unit(x)), unit = conv W->W, BN, ReLU, dropout
//   out:    conv W->3J
template <typename T>
class LiftingNet {
 public:
  explicit LiftingNet(LiftingConfig config = {}, std::uint64_t seed = 0)
      : config_(config) {
    config_.validate();
    const auto w = config_.hidden_width;
    input_ = nn::ConvUnit<T>("lift.in", 2 * config_.joints, w, 1, 1, config_.dropout,
                             config_.bn_momentum, config_.bn_epsilon);
    for (std::size_t b = 0; b < config_.blocks; ++b) {
      const std::string name = "lift.block" + std::to_string(b + 1);
      blocks_.push_back({nn::ConvUnit<T>(name + ".a", w, w, 1, 1, config_.dropout,
                                         config_.bn_momentum, config_.bn_epsilon),
                         nn::ConvUnit<T>(name + ".b", w, w, 1, 1, config_.dropout,
                                         config_.bn_momentum, config_.bn_epsilon)});
    }
    output_ = nn::Conv1d<T>("lift.out", w, 3 * config_.joints, 1, 1);
    init(seed);
  }

  void init(std::uint64_t seed) {
    nn::Rng rng(seed);
    input_.init(rng);
    for (auto& b : blocks_) {
      b.first.init(rng);
      b.second.init(rng);
    }
    output_.init(rng);
    dropout_rng_.seed(seed ^ 0x9E3779B97F4A7C15ull);
  }

  void reseed(std::uint64_t seed) { dropout_rng_.seed(seed); }

  // (B, 2J, 1) -> (B, 3J, 1)
  Tensor<T> forward(const Tensor<T>& x, nn::Mode mode) {
    if (x.rank() != 3 || x.dim(1) != 2 * config_.joints || x.dim(2) != 1) {
      fail(ErrorKind::shape, "lifting net expects (B, " +
                                 std::to_string(2 * config_.joints) + ", 1), got " +
                                 shape_string(x.shape()));
    }
    Tensor<T> h = input_.forward(x, mode, dropout_rng_);
    for (auto& [a, b] : blocks_) h = h + b.forward(a.forward(h, mode, dropout_rng_), mode, dropout_rng_);
    return output_.forward(h);
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    Tensor<T> g = output_.backward(grad_out);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it)
      g = g + it->first.backward(it->second.backward(g));
    return input_.backward(g);
  }

  std::vector<nn::Parameter<T>*> parameters() {
    std::vector<nn::Parameter<T>*> out;
    input_.collect(out);
    for (auto& [a, b] : blocks_) {
      a.collect(out);
      b.collect(out);
    }
    output_.collect(out);
    return out;
  }

  std::vector<nn::StateRef<T>> state() {
    std::vector<nn::Buffer<T>> buffers;
    input_.collect_buffers(buffers);
    for (auto& [a, b] : blocks_) {
      a.collect_buffers(buffers);
      b.collect_buffers(buffers);
    }
    return nn::state_refs(parameters(), buffers);
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }

  std::vector<nn::LayerCost> cost_plan() const {
    using K = nn::LayerCost::Kind;
    const auto w = config_.hidden_width;
    std::vector<nn::LayerCost> plan;
    auto unit = [&](const std::string& name, std::size_t in) {
      plan.push_back({name, K::conv, in, w, 1, 1, 0});
      plan.push_back({name + ".bn", K::batchnorm, 0, 0, 1, 1, w});
      plan.push_back({name + ".relu", K::relu, 0, 0, 1, 1, w});
    };
    unit("lift.in", 2 * config_.joints);
    for (std::size_t b = 0; b < config_.blocks; ++b) {
      const std::string name = "lift.block" + std::to_string(b + 1);
      unit(name + ".a", w);
      unit(name + ".b", w);
      plan.push_back({name + ".add", K::add, 0, 0, 1, 1, w});
    }
    plan.push_back({"lift.out", K::conv, w, 3 * config_.joints, 1, 1, 0});
    return plan;
  }

  nn::Conv1d<T>& output_layer() { return output_; }
  const LiftingConfig& config() const { return config_; }

 private:
  LiftingConfig config_;
  nn::ConvUnit<T> input_;
  std::vector<std::pair<nn::ConvUnit<T>, nn::ConvUnit<T>>> blocks_;
  nn::Conv1d<T> output_;
  nn::Rng dropout_rng_;
};

// Row j*2 + axis of the (2J) input vector holds joint j.
template <typename T>
Tensor<T> pack_poses_2d(const std::vector<Pose2D>& poses) {
  if (poses.empty()) fail(ErrorKind::invalid_input, "no poses to pack");
  const auto joints = static_cast<std::size_t>(poses.front().rows());
  Tensor<T> x({poses.size(), 2 * joints, 1});
  for (std::size_t b = 0; b < poses.size(); ++b) {
    if (static_cast<std::size_t>(poses[b].rows()) != joints) {
      fail(ErrorKind::shape, "pose batch mixes joint counts");
    }
    for (std::size_t j = 0; j < joints; ++j)
      for (std::size_t a = 0; a < 2; ++a)
        x(b, 2 * j + a, 0) = static_cast<T>(poses[b](static_cast<Eigen::Index>(j), a));
  }
  return x;
}

template <typename T>
Tensor<T> pack_poses_3d(const std::vector<Pose3D>& poses) {
  if (poses.empty()) fail(ErrorKind::invalid_input, "no poses to pack");
  const auto joints = static_cast<std::size_t>(poses.front().rows());
  Tensor<T> y({poses.size(), 3 * joints, 1});
  for (std::size_t b = 0; b < poses.size(); ++b)
    for (std::size_t j = 0; j < joints; ++j)
      for (std::size_t a = 0; a < 3; ++a)
        y(b, 3 * j + a, 0) = static_cast<T>(poses[b](static_cast<Eigen::Index>(j), a));
  return y;
}

template <typename T>
std::vector<Pose3D> unpack_poses_3d(const Tensor<T>& y) {
  const std::size_t joints = y.dim(1) / 3;
  std::vector<Pose3D> out;
  for (std::size_t b = 0; b < y.dim(0); ++b) {
    Pose3D p(static_cast<Eigen::Index>(joints), 3);
    for (std::size_t j = 0; j < joints; ++j)
      for (std::size_t a = 0; a < 3; ++a)
        p(static_cast<Eigen::Index>(j), a) = static_cast<double>(y(b, 3 * j + a, 0));
    out.push_back(std::move(p));
  }
  return out;
}

// Eval-mode lifting of already normalized 2D poses.
template <typename T>
std::vector<Pose3D> lift(LiftingNet<T>& net, const std::vector<Pose2D>& poses) {
  for (const auto& p : poses) {
    if (static_cast<std::size_t>(p.rows()) != net.config().joints) {
      fail(ErrorKind::shape, "pose has " + std::to_string(p.rows()) +
                                 " joints, lifting net expects " +
                                 std::to_string(net.config().joints));
    }
  }
  return unpack_poses_3d(net.forward(pack_poses_2d<T>(poses), nn::Mode::eval));
}

template <typename T>
Pose3D lift(LiftingNet<T>& net, const Pose2D& pose) {
  return lift(net, std::vector<Pose2D>{pose}).front();
}

struct PosePair {
  Pose2D input;   // normalized 2D
  Pose3D target;  // root-centered, Frobenius-scaled 3D
};

// Mean over poses of the squared L2 error, in eval mode.
template <typename T>
double lifting_objective(LiftingNet<T>& net, const std::vector<PosePair>& pairs) {
  if (pairs.empty()) fail(ErrorKind::invalid_input, "empty lifting dataset");
  double total = 0.0;
  constexpr std::size_t chunk = 256;
  for (std::size_t start = 0; start < pairs.size(); start += chunk) {
    const std::size_t end = std::min(pairs.size(), start + chunk);
    std::vector<Pose2D> in;
    std::vector<Pose3D> target;
    for (std::size_t i = start; i < end; ++i) {
      in.push_back(pairs[i].input);
      target.push_back(pairs[i].target);
    }
    const auto pred = lift(net, in);
    for (std::size_t i = 0; i < pred.size(); ++i)
      total += (pred[i] - target[i]).squaredNorm();
  }
  return total / static_cast<double>(pairs.size());
}

struct LiftingTrainOptions {
  int epochs = 60;
  std::size_t batch_size = 16;
  nn::LrSchedule schedule{1e-4, nn::LrSchedule::Kind::step, {20, 40}, 0.1};
  nn::AdamConfig adam{};
  std::uint64_t seed = 0;
  // Stop once this many optimizer steps have run (0 = no limit).
  std::size_t max_steps = 0;
  // Stop once the eval-mode objective falls below this (0 = never).
  double target_objective = 0.0;
};

struct LiftingEpoch {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;  // mean train-mode batch loss
  double objective = 0.0;   // eval-mode objective after the epoch
  std::size_t steps = 0;    // cumulative optimizer steps
};

template <typename T>
std::vector<LiftingEpoch> train_lifting(LiftingNet<T>& net, const std::vector<PosePair>& pairs,
                                        const LiftingTrainOptions& opts = {},
                                        const std::function<void(const LiftingEpoch&)>& on_epoch = {}) {
  if (pairs.empty()) fail(ErrorKind::invalid_input, "empty lifting dataset");
  if (opts.batch_size == 0) fail(ErrorKind::config, "batch size must be positive");
  nn::Adam<T> adam(net.parameters(), opts.adam);
  nn::Rng shuffle_rng(opts.seed);
  net.reseed(opts.seed + 1);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<LiftingEpoch> curve;
  std::size_t steps = 0;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const double lr = opts.schedule.lr_at(epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    bool stop = false;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      const std::size_t end = std::min(order.size(), start + opts.batch_size);
      std::vector<Pose2D> in;
      std::vector<Pose3D> target;
      for (std::size_t i = start; i < end; ++i) {
        in.push_back(pairs[order[i]].input);
        target.push_back(pairs[order[i]].target);
      }
      adam.zero_grad();
      const Tensor<T> pred = net.forward(pack_poses_2d<T>(in), nn::Mode::train);
      const auto loss = nn::mse_loss(pred, pack_poses_3d<T>(target));
      if (!std::isfinite(static_cast<double>(loss.value))) {
        fail(ErrorKind::numeric, "lifting loss became non-finite at epoch " +
                                     std::to_string(epoch) + ", step " +
                                     std::to_string(steps));
      }
      net.backward(loss.grad);
      adam.step(lr);
      loss_sum += static_cast<double>(loss.value) * static_cast<double>(end - start);
      seen += end - start;
      ++steps;
      if (opts.max_steps && steps >= opts.max_steps) {
        stop = true;
        break;
      }
    }
    LiftingEpoch e{epoch, lr, loss_sum / static_cast<double>(seen),
                   lifting_objective(net, pairs), steps};
    curve.push_back(e);
    if (on_epoch) on_epoch(e);
    if (stop || (opts.target_objective > 0.0 && e.objective < opts.target_objective)) break;
  }
  return curve;
}

}  // namespace fallnet
