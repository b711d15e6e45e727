#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <numeric>
#include <thread>
#include <vector>

#include "fallnet/fall_net.hpp"
#include "fallnet/metrics.hpp"

namespace fallnet {

// Eval-mode predictions over a dataset. With threads > 1 the records are
// sharded over copies of the network; results do not depend on the count.
template <typename T>
std::vector<Prediction> predict_all(FallNet<T>& net, const std::vector<FixedSequence>& data,
                                    std::size_t threads = 1, std::size_t batch = 16) {
  std::vector<Prediction> out(data.size());
  auto run = [&](FallNet<T>& model, std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; s += batch) {
      const std::size_t e = std::min(end, s + batch);
      std::vector<const FixedSequence*> ptrs;
      for (std::size_t i = s; i < e; ++i) ptrs.push_back(&data[i]);
      const auto preds = predict_batch(model, ptrs);
      std::copy(preds.begin(), preds.end(), out.begin() + static_cast<std::ptrdiff_t>(s));
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, data.size()));
  if (threads == 1) {
    run(net, 0, data.size());
    return out;
  }
  std::vector<FallNet<T>> copies(threads, net);
  std::vector<std::thread> workers;
  // Shards hold whole batches so every batch, and its rounding, is the same
  // for any thread count.
  const std::size_t batches = (data.size() + batch - 1) / batch;
  const std::size_t per = (batches + threads - 1) / threads * batch;
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t begin = w * per, end = std::min(data.size(), begin + per);
    if (begin >= end) break;
    workers.emplace_back([&, w, begin, end] { run(copies[w], begin, end); });
  }
  for (auto& t : workers) t.join();
  return out;
}

template <typename T>
metrics::Confusion evaluate_fall(FallNet<T>& net, const std::vector<FixedSequence>& data,
                                 std::size_t threads = 1) {
  const auto preds = predict_all(net, data, threads);
  std::vector<int> p, y;
  for (std::size_t i = 0; i < data.size(); ++i) {
    p.push_back(preds[i].label);
    y.push_back(data[i].label);
  }
  return metrics::confusion_metrics(p, y);
}

struct FallTrainOptions {
  int epochs = 20;
  std::size_t batch_size = 16;
  nn::LrSchedule schedule{1e-4, nn::LrSchedule::Kind::step, {}, 0.1};
  nn::AdamConfig adam{};
  nn::ClassWeights weights = nn::ClassWeights::uniform();
  std::uint64_t seed = 0;
  // Stop after the first epoch whose training accuracy reaches 1.
  bool stop_at_perfect = false;
  std::size_t eval_threads = 1;
  // Receives non-fatal diagnostics; stderr when unset.
  std::function<void(const std::string&)> on_warning;
};

// Set when the data holds a single class, so precision or recall will come
// out undefined.
inline std::optional<std::string> single_class_warning(const std::vector<FixedSequence>& data) {
  std::size_t falls = 0;
  for (const auto& s : data) falls += s.label == 1 ? 1 : 0;
  if (falls == 0) return "training data has no fall samples; recall is undefined";
  if (falls == data.size()) return "training data has only fall samples";
  return std::nullopt;
}

struct FallEpoch {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;  // mean train-mode batch loss
  metrics::Confusion train;  // eval-mode predictions on the training set
};

// Mini-batch Adam on (weighted) cross entropy. Metrics are logged from an
// eval-mode pass over the training data after each epoch.
template <typename T>
std::vector<FallEpoch> train_fall(FallNet<T>& net, const std::vector<FixedSequence>& data,
                                  const FallTrainOptions& opts = {},
                                  const std::function<void(const FallEpoch&)>& on_epoch = {}) {
  if (data.empty()) fail(ErrorKind::invalid_input, "empty fall-detection dataset");
  if (opts.batch_size == 0) fail(ErrorKind::config, "batch size must be positive");
  for (const auto& s : data) {
    if (s.label != 0 && s.label != 1) fail(ErrorKind::invalid_input, "labels must be 0 or 1");
  }
  if (auto w = single_class_warning(data)) {
    if (opts.on_warning) opts.on_warning(*w);
    else std::cerr << "warning: " << *w << '\n';
  }
  nn::Adam<T> adam(net.parameters(), opts.adam);
  nn::Rng shuffle_rng(opts.seed);
  net.reseed(opts.seed + 1);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<FallEpoch> log;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const double lr = opts.schedule.lr_at(epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      const std::size_t end = std::min(order.size(), start + opts.batch_size);
      std::vector<const FixedSequence*> batch;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&data[order[i]]);
        labels.push_back(data[order[i]].label);
      }
      adam.zero_grad();
      const Tensor<T> logits = net.forward(FallNet<T>::pack_sequences(batch), nn::Mode::train);
      const auto loss = nn::cross_entropy_batch(logits, std::span<const int>(labels), opts.weights);
      if (!std::isfinite(static_cast<double>(loss.value))) {
        fail(ErrorKind::numeric, "fall loss became non-finite at epoch " + std::to_string(epoch));
      }
      net.backward(loss.grad);
      adam.step(lr);
      loss_sum += static_cast<double>(loss.value) * static_cast<double>(end - start);
    }
    FallEpoch e{epoch, lr, loss_sum / static_cast<double>(data.size()),
                evaluate_fall(net, data, opts.eval_threads)};
    log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (opts.stop_at_perfect && e.train.tp + e.train.tn == e.train.total()) break;
  }
  return log;
}

}  // namespace fallnet
