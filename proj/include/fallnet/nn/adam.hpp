#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fallnet/nn/parameter.hpp"

namespace fallnet::nn {

// Learning-rate schedule keyed by epoch. Step mode multiplies by `factor`
// at every milestone reached; exponential mode multiplies by `factor` once
// per epoch.
struct LrSchedule {
  enum class Kind { step, exponential };

  double base_lr = 1e-4;
  Kind kind = Kind::step;
  std::vector<int> milestones;
  double factor = 0.1;

  double lr_at(int epoch) const {
    if (kind == Kind::exponential) return base_lr * std::pow(factor, epoch);
    int hits = 0;
    for (int m : milestones)
      if (epoch >= m) ++hits;
    return base_lr * std::pow(factor, hits);
  }

  static LrSchedule constant(double lr) { return {lr, Kind::step, {}, 1.0}; }
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments are kept in double regardless of the
// parameter type.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Parameter<T>*> params, AdamConfig config = {})
      : params_(std::move(params)), config_(config) {
    for (const auto* p : params_) {
      first_.emplace_back(p->value.size(), 0.0);
      second_.emplace_back(p->value.size(), 0.0);
    }
  }

  void step(double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = *params_[k];
      auto& m = first_[k];
      auto& v = second_[k];
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i];
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        p.value[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + config_.epsilon));
      }
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<double>& first_moment(std::size_t k) const { return first_[k]; }
  const std::vector<double>& second_moment(std::size_t k) const { return second_[k]; }

 private:
  std::vector<Parameter<T>*> params_;
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

}  // namespace fallnet::nn
