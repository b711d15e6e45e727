#pragma once

#include <random>

#include "fallnet/nn/parameter.hpp"
#include "fallnet/tensor.hpp"

namespace fallnet::nn {

template <typename T>
class ReLU {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> y = x;
    mask_.assign(x.size(), false);
    for (std::size_t i = 0; i < y.size(); ++i) {
      mask_[i] = y[i] > T{0};
      if (!mask_[i]) y[i] = T{0};
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) const {
    Tensor<T> g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!mask_[i]) g[i] = T{0};
    return g;
  }

 private:
  std::vector<bool> mask_;
};

// Inverted dropout: train mode zeroes each element with probability p and
// scales survivors by 1/(1-p); eval mode is the identity.
template <typename T>
class Dropout {
 public:
  explicit Dropout(double rate = 0.0) : rate_(rate) {
    if (!(rate >= 0.0 && rate < 1.0)) {
      fail(ErrorKind::config,
           "dropout rate must lie in [0, 1), got " + std::to_string(rate));
    }
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng& rng) {
    active_ = mode == Mode::train && rate_ > 0.0;
    if (!active_) return x;
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    scale_ = Tensor<T>(x.shape());
    Tensor<T> y = x;
    for (std::size_t i = 0; i < y.size(); ++i) {
      scale_[i] = u(rng) < rate_ ? T{0} : keep_scale;
      y[i] *= scale_[i];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) const {
    if (!active_) return grad_out;
    Tensor<T> g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= scale_[i];
    return g;
  }

  double rate() const { return rate_; }

 private:
  double rate_ = 0.0;
  bool active_ = false;
  Tensor<T> scale_;
};

// Mean over the time axis: (B, C, L) -> (B, C, 1), or (C, L) -> (C).
template <typename T>
class GlobalAvgPool {
 public:
  Tensor<T> forward(const Tensor<T>& input) {
    const Tensor<T> x = as_batch(input);
    in_shape_ = x.shape();
    input_rank_ = input.rank();
    const std::size_t batch = x.dim(0), channels = x.dim(1), length = x.dim(2);
    Tensor<T> y({batch, channels, 1});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < channels; ++c) {
        T s{0};
        for (std::size_t t = 0; t < length; ++t) s += x(b, c, t);
        y(b, c, 0) = s / static_cast<T>(length);
      }
    if (input_rank_ == 2) return y.reshaped({channels});
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) const {
    const std::size_t batch = in_shape_[0], channels = in_shape_[1],
                      length = in_shape_[2];
    Tensor<T> g(in_shape_);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < channels; ++c) {
        const T v = grad_out[b * channels + c] / static_cast<T>(length);
        for (std::size_t t = 0; t < length; ++t) g(b, c, t) = v;
      }
    if (input_rank_ == 2) return g.reshaped({channels, length});
    return g;
  }

 private:
  Shape in_shape_;
  std::size_t input_rank_ = 3;
};

// Symmetric crop of the time axis by `crop` frames at each end.
template <typename T>
Tensor<T> crop_time(const Tensor<T>& x, std::size_t crop) {
  const std::size_t batch = x.dim(0), channels = x.dim(1), length = x.dim(2);
  if (length <= 2 * crop) {
    fail(ErrorKind::shape, "cannot crop " + std::to_string(crop) +
                               " frames per side from length " +
                               std::to_string(length));
  }
  const std::size_t out_len = length - 2 * crop;
  Tensor<T> y({batch, channels, out_len});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < out_len; ++t) y(b, c, t) = x(b, c, t + crop);
  return y;
}

// Adjoint of crop_time: scatter into a zero tensor of the uncropped length.
template <typename T>
Tensor<T> uncrop_time(const Tensor<T>& g, std::size_t crop) {
  const std::size_t batch = g.dim(0), channels = g.dim(1), length = g.dim(2);
  Tensor<T> y({batch, channels, length + 2 * crop});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < length; ++t) y(b, c, t + crop) = g(b, c, t);
  return y;
}

}  // namespace fallnet::nn
