#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "fallnet/tensor.hpp"

namespace fallnet::nn {

template <typename T>
struct LossResult {
  T value{0};
  Tensor<T> grad;  // d value / d prediction, same shape as the prediction
};

// Mean over the batch (leading axis) of the per-item squared L2 error.
template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape(pred, target, "mse_loss");
  if (pred.rank() == 0 || pred.dim(0) == 0) {
    fail(ErrorKind::shape, "mse_loss needs a non-empty batch");
  }
  const T batch = static_cast<T>(pred.dim(0));
  LossResult<T> r{T{0}, Tensor<T>(pred.shape())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T d = pred[i] - target[i];
    r.value += d * d;
    r.grad[i] = T{2} * d / batch;
  }
  r.value /= batch;
  return r;
}

// Class order for the binary classifier.
enum class FallClass : int { not_fall = 0, fall = 1 };

struct ClassWeights {
  double not_fall = 1.0;
  double fall = 1.0;

  double operator[](int label) const { return label == 1 ? fall : not_fall; }

  static constexpr ClassWeights uniform() { return {1.0, 1.0}; }
  // Fall-weighted configuration: 59/60 for falls, 1/60 for everything else.
  static constexpr ClassWeights fall_weighted() { return {1.0 / 60.0, 59.0 / 60.0}; }
};

template <typename T>
T log_sum_exp(std::span<const T> logits) {
  const T m = *std::max_element(logits.begin(), logits.end());
  T s{0};
  for (T v : logits) s += std::exp(v - m);
  return m + std::log(s);
}

// -w[label] * log softmax(logits)[label]; gradient written into grad.
template <typename T>
T cross_entropy(std::span<const T> logits, int label, const ClassWeights& w,
                std::span<T> grad = {}) {
  const T lse = log_sum_exp(logits);
  const T weight = static_cast<T>(w[label]);
  if (!grad.empty()) {
    for (std::size_t k = 0; k < logits.size(); ++k) {
      const T p = std::exp(logits[k] - lse);
      grad[k] = weight * (p - (static_cast<int>(k) == label ? T{1} : T{0}));
    }
  }
  return weight * (lse - logits[static_cast<std::size_t>(label)]);
}

template <typename T>
T cross_entropy(std::span<const T> logits, int label) {
  return cross_entropy(logits, label, ClassWeights::uniform());
}

// Batch mean of the (optionally weighted) cross entropy. Logits are
// (B, K) or (B, K, 1).
template <typename T>
LossResult<T> cross_entropy_batch(const Tensor<T>& logits,
                                  std::span<const int> labels,
                                  const ClassWeights& w) {
  const std::size_t batch = logits.dim(0);
  if (labels.size() != batch || batch == 0) {
    fail(ErrorKind::shape, "cross_entropy_batch: " + std::to_string(batch) +
                               " logit rows vs " +
                               std::to_string(labels.size()) + " labels");
  }
  const std::size_t k = logits.size() / batch;
  LossResult<T> r{T{0}, Tensor<T>(logits.shape())};
  for (std::size_t b = 0; b < batch; ++b) {
    std::span<const T> row(logits.data() + b * k, k);
    std::span<T> grow(r.grad.data() + b * k, k);
    r.value += cross_entropy(row, labels[b], w, grow);
  }
  const T inv = T{1} / static_cast<T>(batch);
  r.value *= inv;
  for (auto& g : r.grad.values()) g *= inv;
  return r;
}

}  // namespace fallnet::nn
