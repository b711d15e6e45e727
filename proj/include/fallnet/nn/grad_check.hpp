#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fallnet/nn/parameter.hpp"
#include "fallnet/tensor.hpp"

namespace fallnet::nn {

struct GradCheckOptions {
  double step = 1e-5;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor);
  // the floor keeps exactly-zero gradients (e.g. a bias feeding batch norm)
  // from turning finite-difference rounding noise into a huge ratio.
  double floor = 1e-6;
  bool check_input = true;
  std::uint64_t seed = 17;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  double max_rel_error() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_error);
    return m;
  }
  bool passed(double tolerance) const { return max_rel_error() < tolerance; }
};

inline double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

// Compares analytic gradients against central differences for every
// parameter entry (and the input) of a model fragment. The scalar being
// differentiated is <r, forward(input)> for a fixed random r, so the
// backward pass is seeded with grad_out = r.
//
// `forward` must be a deterministic function of the parameters and input;
// fragments with dropout should reseed their RNG inside it.
template <typename Forward, typename Backward>
GradCheckReport grad_check(Forward&& forward, Backward&& backward,
                           const std::vector<Parameter<double>*>& params,
                           Tensor<double> input,
                           const GradCheckOptions& opts = {}) {
  for (auto* p : params) p->zero_grad();
  const Tensor<double> out = forward(input);
  Rng rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor<double> probe(out.shape());
  for (auto& v : probe.values()) v = normal(rng);
  const Tensor<double> grad_in = backward(probe);

  auto objective = [&](const Tensor<double>& x) {
    const Tensor<double> y = forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += probe[i] * y[i];
    return s;
  };

  GradCheckReport report;
  auto check_values = [&](const std::string& name, Tensor<double>& values,
                          const Tensor<double>& analytic, bool perturb_input) {
    GradCheckEntry e{name};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double orig = values[i];
      values[i] = orig + opts.step;
      const double plus = objective(perturb_input ? values : input);
      values[i] = orig - opts.step;
      const double minus = objective(perturb_input ? values : input);
      values[i] = orig;
      const double numeric = (plus - minus) / (2.0 * opts.step);
      const double err = relative_error(analytic[i], numeric, opts.floor);
      ++e.checked;
      if (err >= e.max_rel_error) {
        e.max_rel_error = err;
        e.worst_index = i;
        e.worst_analytic = analytic[i];
        e.worst_numeric = numeric;
      }
    }
    report.entries.push_back(std::move(e));
  };

  std::vector<Tensor<double>> analytic;
  for (auto* p : params) analytic.push_back(p->grad);
  for (std::size_t k = 0; k < params.size(); ++k)
    check_values(params[k]->name, params[k]->value, analytic[k], false);
  if (opts.check_input) {
    Tensor<double> x = input;
    check_values("input", x, grad_in, true);
  }
  return report;
}

}  // namespace fallnet::nn
