#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fallnet/nn/parameter.hpp"
#include "fallnet/tensor.hpp"

namespace fallnet::nn {

// Output length of an unpadded, stride-1 convolution.
inline std::size_t conv1d_output_length(std::size_t length, std::size_t kernel,
                                        std::size_t dilation) {
  const std::size_t span = dilation * (kernel - 1);
  if (length <= span) {
    fail(ErrorKind::shape, "conv1d (k=" + std::to_string(kernel) +
                               ", d=" + std::to_string(dilation) +
                               ") needs input length >= " +
                               std::to_string(span + 1) + ", got " +
                               std::to_string(length));
  }
  return length - span;
}

namespace detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Unfolds (B, C_in, L) into a (C_in * K, B * L_out) matrix so the
// convolution becomes a single product with the (C_out, C_in * K) weight.
template <typename T>
RowMat<T> im2col(const Tensor<T>& x, std::size_t kernel, std::size_t dilation,
                 std::size_t out_len) {
  const std::size_t batch = x.dim(0), c_in = x.dim(1), length = x.dim(2);
  RowMat<T> cols(c_in * kernel, batch * out_len);
  for (std::size_t i = 0; i < c_in; ++i)
    for (std::size_t j = 0; j < kernel; ++j) {
      T* dst = cols.data() + (i * kernel + j) * batch * out_len;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* src = x.data() + (b * c_in + i) * length + j * dilation;
        std::copy(src, src + out_len, dst + b * out_len);
      }
    }
  return cols;
}

template <typename T>
void col2im_add(const RowMat<T>& cols, std::size_t kernel, std::size_t dilation,
                std::size_t out_len, Tensor<T>& gx) {
  const std::size_t batch = gx.dim(0), c_in = gx.dim(1), length = gx.dim(2);
  for (std::size_t i = 0; i < c_in; ++i)
    for (std::size_t j = 0; j < kernel; ++j) {
      const T* src = cols.data() + (i * kernel + j) * batch * out_len;
      for (std::size_t b = 0; b < batch; ++b) {
        T* dst = gx.data() + (b * c_in + i) * length + j * dilation;
        const T* s = src + b * out_len;
        for (std::size_t t = 0; t < out_len; ++t) dst[t] += s[t];
      }
    }
}

template <typename T>
Eigen::Map<const RowMat<T>> weight_matrix(const Tensor<T>& w) {
  return {w.data(), static_cast<Eigen::Index>(w.dim(0)),
          static_cast<Eigen::Index>(w.dim(1) * w.dim(2))};
}

}  // namespace detail

template <typename T>
struct Conv1dGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

// out[b, c, t] = bias[c] + sum_{i, j} weight[c, i, j] * in[b, i, t + j * dilation]
// Input is (C_in, L) or (B, C_in, L); the output keeps the input's rank.
template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& weight, const Tensor<T>& bias,
                         std::size_t dilation, const Tensor<T>& input) {
  const Tensor<T> x = as_batch(input);
  const std::size_t batch = x.dim(0), c_in = x.dim(1), length = x.dim(2);
  const std::size_t c_out = weight.dim(0), kernel = weight.dim(2);
  if (weight.dim(1) != c_in) {
    fail(ErrorKind::shape, "conv1d expects " + std::to_string(weight.dim(1)) +
                               " input channels, got " + std::to_string(c_in));
  }
  const std::size_t out_len = conv1d_output_length(length, kernel, dilation);

  const detail::RowMat<T> prod =
      detail::weight_matrix(weight) * detail::im2col(x, kernel, dilation, out_len);
  Tensor<T> out({batch, c_out, out_len});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < c_out; ++c) {
      const T* src = prod.data() + c * batch * out_len + b * out_len;
      T* dst = out.data() + (b * c_out + c) * out_len;
      for (std::size_t t = 0; t < out_len; ++t) dst[t] = src[t] + bias[c];
    }
  if (input.rank() == 2) return out.reshaped({c_out, out_len});
  return out;
}

template <typename T>
Conv1dGrads<T> conv1d_backward(const Tensor<T>& weight, std::size_t dilation,
                               const Tensor<T>& input,
                               const Tensor<T>& grad_output) {
  const Tensor<T> x = as_batch(input);
  const Tensor<T> g = as_batch(grad_output);
  const std::size_t batch = x.dim(0), c_in = x.dim(1), length = x.dim(2);
  const std::size_t c_out = weight.dim(0), kernel = weight.dim(2);
  const std::size_t out_len = conv1d_output_length(length, kernel, dilation);
  if (g.shape() != Shape{batch, c_out, out_len} || weight.dim(1) != c_in) {
    fail(ErrorKind::shape, "conv1d backward: grad_output " +
                               shape_string(g.shape()) + " does not match " +
                               shape_string({batch, c_out, out_len}));
  }

  // Gradient laid out like the forward product: (C_out, B * L_out).
  detail::RowMat<T> gm(c_out, batch * out_len);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < c_out; ++c) {
      const T* src = g.data() + (b * c_out + c) * out_len;
      std::copy(src, src + out_len, gm.data() + c * batch * out_len + b * out_len);
    }

  Conv1dGrads<T> grads{Tensor<T>({batch, c_in, length}),
                       Tensor<T>(weight.shape()), Tensor<T>({c_out})};
  const detail::RowMat<T> cols = detail::im2col(x, kernel, dilation, out_len);
  Eigen::Map<detail::RowMat<T>>(grads.weight.data(), static_cast<Eigen::Index>(c_out),
                                static_cast<Eigen::Index>(c_in * kernel))
      .noalias() = gm * cols.transpose();
  for (std::size_t c = 0; c < c_out; ++c) grads.bias[c] = gm.row(static_cast<Eigen::Index>(c)).sum();
  const detail::RowMat<T> gcols = detail::weight_matrix(weight).transpose() * gm;
  detail::col2im_add(gcols, kernel, dilation, out_len, grads.input);
  if (input.rank() == 2) grads.input = grads.input.reshaped({c_in, length});
  return grads;
}

// Unpadded dilated 1D convolution with bias.
template <typename T>
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(std::string name, std::size_t in_channels, std::size_t out_channels,
         std::size_t kernel_size, std::size_t dilation = 1)
      : in_channels_(in_channels),
        out_channels_(out_channels),
        kernel_size_(kernel_size),
        dilation_(dilation),
        weight_(name + ".weight", {out_channels, in_channels, kernel_size}),
        bias_(name + ".bias", {out_channels}) {
    if (in_channels == 0 || out_channels == 0 || kernel_size == 0 ||
        dilation == 0) {
      fail(ErrorKind::config, "conv1d " + name +
                                  ": channels, kernel and dilation must be "
                                  "positive");
    }
  }

  void init(Rng& rng) {
    kaiming_uniform(weight_.value, in_channels_ * kernel_size_, rng);
    bias_.value.fill(T{0});
  }

  Tensor<T> forward(const Tensor<T>& x) {
    input_ = x;
    return conv1d_forward(weight_.value, bias_.value, dilation_, x);
  }

  // Accumulates parameter gradients and returns the input gradient.
  Tensor<T> backward(const Tensor<T>& grad_out) {
    auto g = conv1d_backward(weight_.value, dilation_, input_, grad_out);
    for (std::size_t i = 0; i < g.weight.size(); ++i) weight_.grad[i] += g.weight[i];
    for (std::size_t i = 0; i < g.bias.size(); ++i) bias_.grad[i] += g.bias[i];
    return std::move(g.input);
  }

  std::size_t output_length(std::size_t length) const {
    return conv1d_output_length(length, kernel_size_, dilation_);
  }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  std::size_t in_channels() const { return in_channels_; }
  std::size_t out_channels() const { return out_channels_; }
  std::size_t kernel_size() const { return kernel_size_; }
  std::size_t dilation() const { return dilation_; }
  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }
  const Parameter<T>& weight() const { return weight_; }
  const Parameter<T>& bias() const { return bias_; }

 private:
  std::size_t in_channels_ = 0;
  std::size_t out_channels_ = 0;
  std::size_t kernel_size_ = 1;
  std::size_t dilation_ = 1;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
};

}  // namespace fallnet::nn
