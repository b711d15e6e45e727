#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fallnet/nn/block.hpp"
#include "fallnet/normalization.hpp"
#include "fallnet/skeleton.hpp"

namespace fallnet::metrics {

// ---------------------------------------------------------------- joints

struct JdrResult {
  std::vector<std::size_t> detected;  // per joint
  std::size_t poses = 0;              // poses that counted
  std::size_t excluded = 0;           // poses dropped for head == neck

  double rate(std::size_t joint) const {
    return poses == 0 ? 0.0
                      : static_cast<double>(detected.at(joint)) / static_cast<double>(poses);
  }
  std::vector<double> rates() const {
    std::vector<double> r;
    for (std::size_t j = 0; j < detected.size(); ++j) r.push_back(rate(j));
    return r;
  }
};

// Joint detection rate: joint j of pose i counts when its error is strictly
// below half the ground-truth head-neck distance of pose i.
inline JdrResult jdr(const std::vector<Pose3D>& pred, const std::vector<Pose3D>& gt,
                     std::size_t head = kHead, std::size_t neck = kNeck) {
  if (pred.size() != gt.size()) {
    fail(ErrorKind::shape, "jdr: " + std::to_string(pred.size()) + " predictions vs " +
                               std::to_string(gt.size()) + " ground-truth poses");
  }
  JdrResult r;
  if (gt.empty()) return r;
  const auto joints = static_cast<std::size_t>(gt.front().rows());
  if (head >= joints || neck >= joints) {
    fail(ErrorKind::invalid_input, "jdr: head/neck index outside the pose");
  }
  r.detected.assign(joints, 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (pred[i].rows() != gt[i].rows()) {
      fail(ErrorKind::shape, "jdr: pose " + std::to_string(i) + " joint counts differ");
    }
    const double threshold =
        0.5 * (gt[i].row(static_cast<Eigen::Index>(head)) -
               gt[i].row(static_cast<Eigen::Index>(neck)))
                  .norm();
    if (!(threshold > 0.0)) {
      ++r.excluded;
      continue;
    }
    ++r.poses;
    for (std::size_t j = 0; j < joints; ++j) {
      const auto row = static_cast<Eigen::Index>(j);
      if ((pred[i].row(row) - gt[i].row(row)).norm() < threshold) ++r.detected[j];
    }
  }
  return r;
}

// Unweighted mean of per-joint rates over a joint subset.
inline double mjdr(std::span<const double> rates, const JointSet& set) {
  double s = 0.0;
  for (std::size_t j : set.indices()) {
    if (j >= rates.size()) {
      fail(ErrorKind::invalid_input, "mjdr: no rate for joint " + std::to_string(j));
    }
    s += rates[j];
  }
  return s / static_cast<double>(set.size());
}

// ---------------------------------------------------------- classification

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  double accuracy() const {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
  }
  // Empty when no sample was predicted positive.
  std::optional<double> precision() const {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  // Empty when no positive sample exists.
  std::optional<double> recall() const {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
  }

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Fall (label 1) is the positive class.
inline Confusion confusion_metrics(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    fail(ErrorKind::shape, "confusion_metrics: length mismatch");
  }
  if (labels.empty()) fail(ErrorKind::invalid_input, "confusion_metrics: no samples");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] == 1, y = labels[i] == 1;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// ------------------------------------------------------------- accounting

template <typename Model>
std::size_t count_params(Model& model) {
  return nn::count_scalars(model.parameters());
}

// Convolutions count one FLOP per multiply-accumulate. Element-wise work
// (batch norm, ReLU, residual adds, pooling) is tallied separately at one
// op per element; dropout is free at inference.
struct FlopCount {
  std::uint64_t conv_macs = 0;
  std::uint64_t elementwise = 0;
  std::uint64_t total() const { return conv_macs + elementwise; }
};

inline FlopCount count_flops(const std::vector<nn::LayerCost>& plan) {
  FlopCount f;
  for (const auto& l : plan) {
    if (l.kind == nn::LayerCost::Kind::conv) {
      f.conv_macs += static_cast<std::uint64_t>(l.in_channels) * l.out_channels * l.kernel *
                     l.out_length;
    } else {
      f.elementwise += l.elements;
    }
  }
  return f;
}

// ------------------------------------------------------------- throughput

struct BenchResult {
  std::string platform;
  std::size_t iterations = 0;
  double median_seconds = 0.0;
  double fps = 0.0;             // single-sequence forwards per second
  bool low_confidence = false;  // fewer than 5 timed iterations
};

template <typename Fn>
BenchResult bench_fps(Fn&& run_once, std::size_t warmup, std::size_t iterations,
                      std::string platform) {
  if (iterations == 0) fail(ErrorKind::invalid_input, "bench needs at least one iteration");
  for (std::size_t i = 0; i < warmup; ++i) run_once();
  std::vector<double> times;
  times.reserve(iterations);
  for (std::size_t i = 0; i < iterations; ++i) {
    const auto start = std::chrono::steady_clock::now();
    run_once();
    const auto stop = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  const double median = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
  return {std::move(platform), iterations, median, median > 0.0 ? 1.0 / median : 0.0,
          iterations < 5};
}

}  // namespace fallnet::metrics
