#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fallnet/config.hpp"
#include "fallnet/nn/adam.hpp"
#include "fallnet/nn/block.hpp"
#include "fallnet/nn/loss.hpp"
#include "fallnet/skeleton.hpp"

namespace fallnet {

struct FallNetConfig {
  std::size_t joints = 16;
  std::size_t frames = kDefaultFrames;
  std::size_t channels = 512;
  std::size_t blocks = 4;
  double dropout = 0.25;
  std::size_t kernel = 3;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;

  // Block n (1-based) dilates by kernel^n.
  std::size_t dilation(std::size_t block) const {
    std::size_t d = 1;
    for (std::size_t i = 0; i < block; ++i) d *= kernel;
    return d;
  }

  void validate() const {
    if (joints == 0 || channels == 0 || blocks == 0 || kernel < 2) {
      fail(ErrorKind::config, "fall net config needs joints, channels, blocks >= 1 and kernel >= 2");
    }
    if (kernel % 2 == 0) fail(ErrorKind::config, "kernel must be odd for centered residual crops");
    if (!(dropout >= 0.0 && dropout < 1.0)) {
      fail(ErrorKind::config, "dropout must lie in [0, 1)");
    }
  }

  KeyValues to_kv() const {
    KeyValues kv;
    kv.set("model", "fall");
    kv.set("joints", joints);
    kv.set("frames", frames);
    kv.set("channels", channels);
    kv.set("blocks", blocks);
    kv.set("dropout", dropout);
    kv.set("kernel", kernel);
    kv.set("bn_momentum", bn_momentum);
    kv.set("bn_epsilon", bn_epsilon);
    return kv;
  }

  static FallNetConfig from_kv(const KeyValues& kv) {
    FallNetConfig c;
    c.joints = kv.get_number<std::size_t>("joints", c.joints);
    c.frames = kv.get_number<std::size_t>("frames", c.frames);
    c.channels = kv.get_number<std::size_t>("channels", c.channels);
    c.blocks = kv.get_number<std::size_t>("blocks", c.blocks);
    c.dropout = kv.get_number<double>("dropout", c.dropout);
    c.kernel = kv.get_number<std::size_t>("kernel", c.kernel);
    c.bn_momentum = kv.get_number<double>("bn_momentum", c.bn_momentum);
    c.bn_epsilon = kv.get_number<double>("bn_epsilon", c.bn_epsilon);
    c.validate();
    return c;
  }
};

struct LayerShape {
  std::string name;
  std::size_t channels;
  std::optional<std::size_t> length;  // empty once time is pooled away

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

// Output (channels, length) after each stage. Every kernel-k convolution
// with dilation d shortens time by (k - 1) * d; kernel-1 convs keep it.
inline std::vector<LayerShape> layer_output_sizes(const FallNetConfig& cfg) {
  cfg.validate();
  std::vector<LayerShape> out;
  auto shrink = [&](std::size_t length, std::size_t d, const std::string& stage) {
    const std::size_t span = (cfg.kernel - 1) * d;
    if (length <= span) {
      fail(ErrorKind::shape, stage + " needs more than " + std::to_string(span) +
                                 " frames, got " + std::to_string(length) +
                                 " (input T=" + std::to_string(cfg.frames) + ")");
    }
    return length - span;
  };
  std::size_t length = shrink(cfg.frames, 1, "conv_1");
  out.push_back({"conv_1", cfg.channels, length});
  for (std::size_t n = 1; n <= cfg.blocks; ++n) {
    const std::string name = "res_" + std::to_string(n);
    length = shrink(length, cfg.dilation(n), name);
    out.push_back({name, cfg.channels, length});
  }
  out.push_back({"pool", cfg.channels, std::nullopt});
  out.push_back({"conv_2", 2, std::nullopt});
  return out;
}

// Frames that influence one pre-pool output position.
inline std::size_t receptive_field(const FallNetConfig& cfg) {
  std::size_t rf = 1 + (cfg.kernel - 1);
  for (std::size_t n = 1; n <= cfg.blocks; ++n) rf += (cfg.kernel - 1) * cfg.dilation(n);
  return rf;
}

// Receptive field of an arbitrary conv stack given (kernel, dilation) pairs.
inline std::size_t receptive_field(const std::vector<std::pair<std::size_t, std::size_t>>& stack) {
  std::size_t rf = 1;
  for (auto [k, d] : stack) rf += (k - 1) * d;
  return rf;
}

// Dilated temporal convolutional classifier over (B, 3J, T) pose sequences:
//   conv_1: k=3 d=1 conv 3J->C, BN, ReLU, dropout
//   res_n:  k=3 d=3^n unit, k=1 unit, plus the input center-cropped by d
//   pool:   mean over time
//   conv_2: k=1 conv C->2 (logits: not-fall, fall)
template <typename T>
class FallNet {
 public:
  explicit FallNet(FallNetConfig config = {}, std::uint64_t seed = 0) : config_(config) {
    config_.validate();
    const auto c = config_.channels;
    entry_ = nn::ConvUnit<T>("fall.conv_1", 3 * config_.joints, c, config_.kernel, 1,
                             config_.dropout, config_.bn_momentum, config_.bn_epsilon);
    for (std::size_t n = 1; n <= config_.blocks; ++n) {
      const std::string name = "fall.res_" + std::to_string(n);
      blocks_.push_back(
          {nn::ConvUnit<T>(name + ".dilated", c, c, config_.kernel, config_.dilation(n),
                           config_.dropout, config_.bn_momentum, config_.bn_epsilon),
           nn::ConvUnit<T>(name + ".pointwise", c, c, 1, 1, config_.dropout,
                           config_.bn_momentum, config_.bn_epsilon),
           (config_.kernel - 1) * config_.dilation(n) / 2});
    }
    classifier_ = nn::Conv1d<T>("fall.conv_2", c, 2, 1, 1);
    init(seed);
  }

  void init(std::uint64_t seed) {
    nn::Rng rng(seed);
    entry_.init(rng);
    for (auto& b : blocks_) {
      b.dilated.init(rng);
      b.pointwise.init(rng);
    }
    classifier_.init(rng);
    dropout_rng_.seed(seed ^ 0x9E3779B97F4A7C15ull);
  }

  void reseed(std::uint64_t seed) { dropout_rng_.seed(seed); }

  // (B, 3J, L) -> (B, C, L') before pooling.
  Tensor<T> forward_features(const Tensor<T>& x, nn::Mode mode) {
    if (x.rank() != 3 || x.dim(1) != 3 * config_.joints) {
      fail(ErrorKind::shape, "fall net expects (B, " + std::to_string(3 * config_.joints) +
                                 ", T), got " + shape_string(x.shape()));
    }
    Tensor<T> h = entry_.forward(x, mode, dropout_rng_);
    for (auto& b : blocks_) {
      const Tensor<T> skip = nn::crop_time(h, b.crop);
      h = skip + b.pointwise.forward(b.dilated.forward(h, mode, dropout_rng_), mode,
                                     dropout_rng_);
    }
    return h;
  }

  // (B, 3J, T) -> logits (B, 2, 1)
  Tensor<T> forward(const Tensor<T>& x, nn::Mode mode) {
    return classifier_.forward(pool_.forward(forward_features(x, mode)));
  }

  Tensor<T> forward(const FixedSequence& seq, nn::Mode mode = nn::Mode::eval) {
    return forward(pack_sequences({&seq}), mode);
  }

  Tensor<T> backward(const Tensor<T>& grad_logits) {
    Tensor<T> g = pool_.backward(classifier_.backward(grad_logits));
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
      const Tensor<T> through = it->dilated.backward(it->pointwise.backward(g));
      g = through + nn::uncrop_time(g, it->crop);
    }
    return entry_.backward(g);
  }

  std::vector<nn::Parameter<T>*> parameters() {
    std::vector<nn::Parameter<T>*> out;
    entry_.collect(out);
    for (auto& b : blocks_) {
      b.dilated.collect(out);
      b.pointwise.collect(out);
    }
    classifier_.collect(out);
    return out;
  }

  std::vector<nn::StateRef<T>> state() {
    std::vector<nn::Buffer<T>> buffers;
    entry_.collect_buffers(buffers);
    for (auto& b : blocks_) {
      b.dilated.collect_buffers(buffers);
      b.pointwise.collect_buffers(buffers);
    }
    return nn::state_refs(parameters(), buffers);
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }

  std::vector<nn::LayerCost> cost_plan(std::size_t frames) const {
    using K = nn::LayerCost::Kind;
    FallNetConfig cfg = config_;
    cfg.frames = frames;
    const auto sizes = layer_output_sizes(cfg);
    const auto c = config_.channels;
    std::vector<nn::LayerCost> plan;
    auto unit = [&](const std::string& name, std::size_t in, std::size_t k, std::size_t len) {
      plan.push_back({name, K::conv, in, c, k, len, 0});
      plan.push_back({name + ".bn", K::batchnorm, 0, 0, 1, len, c * len});
      plan.push_back({name + ".relu", K::relu, 0, 0, 1, len, c * len});
    };
    unit("conv_1", 3 * config_.joints, config_.kernel, *sizes[0].length);
    for (std::size_t n = 1; n <= config_.blocks; ++n) {
      const std::size_t len = *sizes[n].length;
      const std::string name = sizes[n].name;
      unit(name + ".dilated", c, config_.kernel, len);
      unit(name + ".pointwise", c, 1, len);
      plan.push_back({name + ".add", K::add, 0, 0, 1, len, c * len});
    }
    plan.push_back({"pool", K::pool, 0, 0, 1, 1, c * *sizes[config_.blocks].length});
    plan.push_back({"conv_2", K::conv, c, 2, 1, 1, 0});
    return plan;
  }

  nn::Conv1d<T>& classifier() { return classifier_; }
  const FallNetConfig& config() const { return config_; }

  // Stacks fixed sequences into a (B, 3J, T) batch.
  static Tensor<T> pack_sequences(const std::vector<const FixedSequence*>& seqs) {
    if (seqs.empty()) fail(ErrorKind::invalid_input, "empty batch");
    const Shape& s = seqs.front()->data.shape();
    Tensor<T> x({seqs.size(), s[0], s[1]});
    const std::size_t n = s[0] * s[1];
    for (std::size_t b = 0; b < seqs.size(); ++b) {
      if (seqs[b]->data.shape() != s) {
        fail(ErrorKind::shape, "batch mixes sequence shapes " + shape_string(s) + " and " +
                                   shape_string(seqs[b]->data.shape()));
      }
      std::copy(seqs[b]->data.data(), seqs[b]->data.data() + n, x.data() + b * n);
    }
    return x;
  }

 private:
  struct Block {
    nn::ConvUnit<T> dilated;
    nn::ConvUnit<T> pointwise;
    std::size_t crop;
  };

  FallNetConfig config_;
  nn::ConvUnit<T> entry_;
  std::vector<Block> blocks_;
  nn::GlobalAvgPool<T> pool_;
  nn::Conv1d<T> classifier_;
  nn::Rng dropout_rng_;
};

struct Prediction {
  int label = 0;             // 0 = not fall, 1 = fall
  double probability = 0.5;  // softmax probability of `label`
};

// Argmax of softmax; an exact tie predicts not-fall.
template <typename T>
Prediction predict_from_logits(T not_fall, T fall) {
  const double a = static_cast<double>(not_fall), b = static_cast<double>(fall);
  const double p_fall = 1.0 / (1.0 + std::exp(a - b));
  if (b > a) return {1, p_fall};
  return {0, 1.0 - p_fall};
}

template <typename T>
std::vector<Prediction> predict_batch(FallNet<T>& net, const std::vector<const FixedSequence*>& seqs) {
  const Tensor<T> logits = net.forward(FallNet<T>::pack_sequences(seqs), nn::Mode::eval);
  std::vector<Prediction> out;
  for (std::size_t b = 0; b < seqs.size(); ++b)
    out.push_back(predict_from_logits(logits[2 * b], logits[2 * b + 1]));
  return out;
}

template <typename T>
Prediction predict(FallNet<T>& net, const FixedSequence& seq) {
  return predict_batch(net, {&seq}).front();
}

}  // namespace fallnet
