#pragma once

#include <string>
#include <vector>

#include "fallnet/nn/batchnorm.hpp"
#include "fallnet/nn/conv1d.hpp"
#include "fallnet/nn/elementwise.hpp"

namespace fallnet::nn {

// conv -> batch norm -> ReLU -> dropout, the unit both networks repeat.
template <typename T>
class ConvUnit {
 public:
  ConvUnit() = default;
  ConvUnit(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel,
           std::size_t dilation, double dropout, double bn_momentum, double bn_eps)
      : conv_(name + ".conv", in, out, kernel, dilation),
        bn_(name + ".bn", out, bn_momentum, bn_eps),
        drop_(dropout) {}

  void init(Rng& rng) { conv_.init(rng); }

  Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng& rng) {
    return drop_.forward(relu_.forward(bn_.forward(conv_.forward(x), mode)), mode, rng);
  }

  Tensor<T> backward(const Tensor<T>& g) {
    return conv_.backward(bn_.backward(relu_.backward(drop_.backward(g))));
  }

  void collect(std::vector<Parameter<T>*>& out) {
    conv_.collect(out);
    bn_.collect(out);
  }
  void collect_buffers(std::vector<Buffer<T>>& out) { bn_.collect_buffers(out); }

  Conv1d<T>& conv() { return conv_; }
  const Conv1d<T>& conv() const { return conv_; }
  BatchNorm1d<T>& bn() { return bn_; }

 private:
  Conv1d<T> conv_;
  BatchNorm1d<T> bn_;
  ReLU<T> relu_;
  Dropout<T> drop_;
};

// Parameters first, then buffers, in each network's declaration order.
template <typename T>
std::vector<StateRef<T>> state_refs(const std::vector<Parameter<T>*>& params,
                                    const std::vector<Buffer<T>>& buffers) {
  std::vector<StateRef<T>> refs;
  for (auto* p : params) refs.push_back({p->name, &p->value});
  for (const auto& b : buffers) refs.push_back({b.name, b.value});
  return refs;
}

// Per-layer cost description used for FLOP accounting.
struct LayerCost {
  enum class Kind { conv, batchnorm, relu, add, pool };
  std::string name;
  Kind kind;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t out_length = 1;
  std::size_t elements = 0;  // for element-wise kinds: elements touched
};

}  // namespace fallnet::nn
