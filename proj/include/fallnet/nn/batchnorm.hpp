#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fallnet/nn/parameter.hpp"
#include "fallnet/tensor.hpp"

namespace fallnet::nn {

// Batch normalization over (B, C, L) activations: statistics per channel
// across batch and time. Train mode normalizes with batch statistics and
// updates running estimates (biased variance, the same statistic used for
// normalization); eval mode uses the running estimates only.
template <typename T>
class BatchNorm1d {
 public:
  BatchNorm1d() = default;
  BatchNorm1d(std::string name, std::size_t channels, double momentum = 0.1,
              double epsilon = 1e-5)
      : channels_(channels),
        momentum_(momentum),
        epsilon_(epsilon),
        gamma_(name + ".gamma", {channels}),
        beta_(name + ".beta", {channels}),
        running_mean_({channels}),
        running_var_({channels}, T{1}),
        name_(std::move(name)) {
    gamma_.value.fill(T{1});
  }

  Tensor<T> forward(const Tensor<T>& input, Mode mode) {
    const Tensor<T> x = as_batch(input);
    const std::size_t batch = x.dim(0), length = x.dim(2);
    if (x.dim(1) != channels_) {
      fail(ErrorKind::shape, name_ + " expects " + std::to_string(channels_) +
                                 " channels, got " + std::to_string(x.dim(1)));
    }
    mode_ = mode;
    input_rank_ = input.rank();
    const std::size_t n = batch * length;
    xhat_ = Tensor<T>(x.shape());
    inv_std_.assign(channels_, T{0});
    Tensor<T> y(x.shape());

    for (std::size_t c = 0; c < channels_; ++c) {
      T mean, var;
      if (mode == Mode::train) {
        double s = 0.0;
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t t = 0; t < length; ++t) s += x(b, c, t);
        const double m = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t t = 0; t < length; ++t) {
            const double d = x(b, c, t) - m;
            ss += d * d;
          }
        const double v = ss / static_cast<double>(n);
        running_mean_[c] =
            static_cast<T>((1.0 - momentum_) * running_mean_[c] + momentum_ * m);
        running_var_[c] = static_cast<T>((1.0 - momentum_) * running_var_[c] +
                                         momentum_ * v);
        mean = static_cast<T>(m);
        var = static_cast<T>(v);
      } else {
        mean = running_mean_[c];
        var = running_var_[c];
      }
      const T inv_std = T{1} / std::sqrt(var + static_cast<T>(epsilon_));
      inv_std_[c] = inv_std;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < length; ++t) {
          const T xh = (x(b, c, t) - mean) * inv_std;
          xhat_(b, c, t) = xh;
          y(b, c, t) = gamma_.value[c] * xh + beta_.value[c];
        }
    }
    if (input_rank_ == 2) return y.reshaped({channels_, length});
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_output) {
    const Tensor<T> g = as_batch(grad_output);
    require_same_shape(g, xhat_, (name_ + " backward").c_str());
    const std::size_t batch = g.dim(0), length = g.dim(2);
    const T n = static_cast<T>(batch * length);
    Tensor<T> gx(g.shape());

    for (std::size_t c = 0; c < channels_; ++c) {
      T sum_g{0}, sum_gx{0};
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < length; ++t) {
          sum_g += g(b, c, t);
          sum_gx += g(b, c, t) * xhat_(b, c, t);
        }
      gamma_.grad[c] += sum_gx;
      beta_.grad[c] += sum_g;
      const T scale = gamma_.value[c] * inv_std_[c];
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < length; ++t) {
          if (mode_ == Mode::train) {
            gx(b, c, t) = scale / n *
                          (n * g(b, c, t) - sum_g - xhat_(b, c, t) * sum_gx);
          } else {
            gx(b, c, t) = scale * g(b, c, t);
          }
        }
    }
    if (input_rank_ == 2) return gx.reshaped({channels_, length});
    return gx;
  }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

  void collect_buffers(std::vector<Buffer<T>>& out) {
    out.push_back({name_ + ".running_mean", &running_mean_});
    out.push_back({name_ + ".running_var", &running_var_});
  }

  std::size_t channels() const { return channels_; }
  Parameter<T>& gamma() { return gamma_; }
  Parameter<T>& beta() { return beta_; }
  const Tensor<T>& running_mean() const { return running_mean_; }
  const Tensor<T>& running_var() const { return running_var_; }
  double momentum() const { return momentum_; }
  double epsilon() const { return epsilon_; }

 private:
  std::size_t channels_ = 0;
  double momentum_ = 0.1;
  double epsilon_ = 1e-5;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  Tensor<T> running_mean_;
  Tensor<T> running_var_;
  std::string name_;

  Mode mode_ = Mode::train;
  std::size_t input_rank_ = 3;
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
};

}  // namespace fallnet::nn
