#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace fallnet;

namespace {

FallNetConfig tiny(std::size_t joints = 8, std::size_t frames = 30, std::size_t channels = 8,
                   std::size_t blocks = 2) {
  FallNetConfig c;
  c.joints = joints;
  c.frames = frames;
  c.channels = channels;
  c.blocks = blocks;
  return c;
}

std::vector<FixedSequence> toy_data(std::uint64_t seed, std::size_t n, std::size_t joints,
                                       std::size_t frames) {
  std::mt19937_64 rng(seed);
  std::vector<FixedSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    FixedSequence s{Tensor<float>({3 * joints, frames}), static_cast<int>(i % 2)};
    std::normal_distribution<float> noise(0.0f, 1.0f);
    for (auto& v : s.data.values()) v = noise(rng) + (s.label ? 0.5f : -0.5f);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<float> flatten(FallNet<float>& net) {
  std::vector<float> v;
  for (auto* p : net.parameters()) v.insert(v.end(), p->value.values().begin(), p->value.values().end());
  return v;
}

}  // namespace

// ----------------------------------------------------------- architecture

TEST(FallNetShapes, DefaultLayerSizes) {
  const auto sizes = layer_output_sizes(FallNetConfig{});
  ASSERT_EQ(sizes.size(), 7u);
  const std::size_t expected[] = {298, 292, 274, 220, 58};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(sizes[i].channels, 512u);
    EXPECT_EQ(sizes[i].length, expected[i]) << sizes[i].name;
  }
  EXPECT_EQ(sizes[5].name, "pool");
  EXPECT_FALSE(sizes[5].length.has_value());
  EXPECT_EQ(sizes[6].channels, 2u);
}

TEST(FallNetShapes, ReceptiveFieldInputCollapsesToOne) {
  FallNetConfig c;
  c.frames = 243;
  EXPECT_EQ(*layer_output_sizes(c)[4].length, 1u);
  c.frames = 242;
  EXPECT_THROW(layer_output_sizes(c), Error);
}

TEST(FallNetShapes, SingleBlockShortInput) {
  auto c = tiny(16, 10, 8, 1);
  const auto sizes = layer_output_sizes(c);
  EXPECT_EQ(*sizes[0].length, 8u);
  EXPECT_EQ(*sizes[1].length, 2u);
  FallNet<float> net(c, 1);
  EXPECT_EQ(net.forward_features(Tensor<float>({2, 48, 10}), nn::Mode::eval).shape(),
            (Shape{2, 8, 2}));
  EXPECT_EQ(net.forward(Tensor<float>({2, 48, 10}), nn::Mode::eval).shape(), (Shape{2, 2, 1}));
}

TEST(FallNetShapes, ReceptiveField) {
  EXPECT_EQ(receptive_field(FallNetConfig{}), 243u);
  EXPECT_EQ(receptive_field(tiny(16, 300, 8, 1)), 9u);
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{1, 1}, {1, 3}, {1, 9}};
  EXPECT_EQ(receptive_field(stack), 1u);
  stack = {{3, 1}, {3, 3}, {3, 9}, {3, 27}, {3, 81}};
  EXPECT_EQ(receptive_field(stack), 243u);
}

TEST(FallNetShapes, ConfigValidation) {
  FallNetConfig c;
  c.kernel = 4;
  EXPECT_THROW(c.validate(), Error);
  c.kernel = 1;
  EXPECT_THROW(c.validate(), Error);
  c = FallNetConfig{};
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), Error);
  FallNet<float> net(tiny(), 0);
  EXPECT_THROW(net.forward(Tensor<float>({1, 25, 30}), nn::Mode::eval), Error);
}

TEST(FallNetShapes, CroppedInfluence) {
  // Two blocks: each pre-pool position sees 27 consecutive frames.
  FallNet<double> net(tiny(4, 400, 6, 2), 3);
  std::mt19937_64 rng(8);
  const Tensor<double> x = oracle::random_tensor(rng, {1, 12, 400});
  const Tensor<double> base = net.forward_features(x, nn::Mode::eval);
  ASSERT_EQ(base.dim(2), 374u);
  for (std::size_t frame : {0u, 100u, 399u}) {
    Tensor<double> y = x;
    for (std::size_t r = 0; r < 12; ++r) y(0, r, frame) += 1.0;
    const Tensor<double> moved = net.forward_features(y, nn::Mode::eval);
    for (std::size_t p = 0; p < 374; ++p) {
      double diff = 0.0;
      for (std::size_t c = 0; c < 6; ++c) diff = std::max(diff, std::abs(moved(0, c, p) - base(0, c, p)));
      const bool inside = p <= frame && frame < p + 27;
      if (!inside) EXPECT_EQ(diff, 0.0) << "frame " << frame << " position " << p;
    }
    double any = 0.0;
    const std::size_t p = std::min<std::size_t>(frame, 373);
    for (std::size_t c = 0; c < 6; ++c) any = std::max(any, std::abs(moved(0, c, p) - base(0, c, p)));
    EXPECT_GT(any, 0.0) << frame;
  }
}

TEST(FallNet, GradCheckTrainMode) {
  FallNet<double> net(tiny(8, 30, 8, 2), 21);
  std::mt19937_64 rng(22);
  const auto report = nn::grad_check(
      [&](const Tensor<double>& x) {
        net.reseed(5);
        return net.forward(x, nn::Mode::train);
      },
      [&](const Tensor<double>& g) { return net.backward(g); }, net.parameters(),
      oracle::random_tensor(rng, {3, 24, 30}));
  for (const auto& e : report.entries) {
    // Conv biases ahead of train-mode batch norm have exactly zero gradient.
    if (e.name.find(".conv.bias") != std::string::npos) {
      EXPECT_LT(std::abs(e.worst_analytic), 1e-12) << e.name;
      EXPECT_LT(std::abs(e.worst_numeric), 1e-8) << e.name;
    } else {
      EXPECT_LT(e.max_rel_error, 1e-4) << e.name;
    }
  }
}

TEST(FallNet, DefaultParameterCount) {
  FallNet<float> net;
  EXPECT_EQ(metrics::count_params(net), 4282882u);
}

// ------------------------------------------------------------- prediction

TEST(FallPredict, ZeroClassifierGivesZeroLogits) {
  FallNet<float> net(tiny(), 2);
  net.classifier().weight().value.fill(0.0f);
  net.classifier().bias().value.fill(0.0f);
  const auto data = toy_data(1, 2, 8, 30);
  const Tensor<float> logits = net.forward(FallNet<float>::pack_sequences(std::vector<const FixedSequence*>{&data[0], &data[1]}), nn::Mode::eval);
  for (float v : logits.values()) EXPECT_EQ(v, 0.0f);
  const auto p = predict(net, data[0]);
  EXPECT_EQ(p.label, 0);
  EXPECT_DOUBLE_EQ(p.probability, 0.5);
}

TEST(FallPredict, SoftmaxProbability) {
  const auto p = predict_from_logits(-2.0, 5.0);
  EXPECT_EQ(p.label, 1);
  EXPECT_NEAR(p.probability, 1.0 / (1.0 + std::exp(-7.0)), 1e-15);
  const auto q = predict_from_logits(3.0, 1.0);
  EXPECT_EQ(q.label, 0);
  EXPECT_NEAR(q.probability, 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_EQ(predict_from_logits(1.25, 1.25).label, 0);
}

TEST(FallPredict, ThreadCountDoesNotChangePredictions) {
  FallNet<float> net(tiny(), 4);
  const auto data = toy_data(2, 37, 8, 30);
  const auto a = predict_all(net, data, 1);
  const auto b = predict_all(net, data, 3);
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(a[i].label, b[i].label);
    EXPECT_EQ(a[i].probability, b[i].probability);
  }
}

// --------------------------------------------------------------- training

TEST(FallTrain, ZeroLearningRateKeepsEverything) {
  auto cfg = tiny();
  cfg.bn_momentum = 0.0;
  cfg.dropout = 0.0;
  FallNet<float> net(cfg, 6);
  const auto before = flatten(net);
  const auto data = toy_data(3, 20, 8, 30);
  FallTrainOptions opts;
  opts.epochs = 3;
  opts.batch_size = 4;
  opts.schedule = nn::LrSchedule{0.0, nn::LrSchedule::Kind::step, {}, 0.1};
  const auto log = train_fall(net, data, opts);
  ASSERT_EQ(log.size(), 3u);
  for (const auto& e : log) EXPECT_EQ(e.train, log.front().train);
  EXPECT_EQ(flatten(net), before);
}

TEST(FallTrain, UniformWeightsMatchPlainCrossEntropy) {
  const auto data = toy_data(4, 16, 8, 30);
  FallTrainOptions plain;
  plain.epochs = 2;
  plain.batch_size = 4;
  plain.schedule.base_lr = 1e-3;
  FallTrainOptions weighted = plain;
  weighted.weights = nn::ClassWeights{1.0, 1.0};
  FallNet<float> a(tiny(), 7), b(tiny(), 7);
  const auto la = train_fall(a, data, plain);
  const auto lb = train_fall(b, data, weighted);
  for (std::size_t i = 0; i < la.size(); ++i) EXPECT_EQ(la[i].loss, lb[i].loss);
  EXPECT_EQ(flatten(a), flatten(b));

  FallTrainOptions skewed = plain;
  skewed.weights = nn::ClassWeights::fall_weighted();
  FallNet<float> c(tiny(), 7);
  train_fall(c, data, skewed);
  EXPECT_NE(flatten(c), flatten(a));
}

TEST(FallTrain, LearnsSeparableToyData) {
  const auto data = toy_data(5, 32, 8, 30);
  FallNet<float> net(tiny(8, 30, 16, 2), 8);
  FallTrainOptions opts;
  opts.epochs = 30;
  opts.batch_size = 8;
  opts.schedule.base_lr = 1e-3;
  opts.stop_at_perfect = true;
  const auto log = train_fall(net, data, opts);
  EXPECT_EQ(log.back().train.accuracy(), 1.0);
  for (const auto& e : log) EXPECT_TRUE(std::isfinite(e.loss));
}

TEST(FallTrain, SingleClassWarning) {
  auto data = toy_data(6, 6, 8, 30);
  for (auto& s : data) s.label = 0;
  std::vector<std::string> warnings;
  FallTrainOptions opts;
  opts.epochs = 1;
  opts.on_warning = [&](const std::string& w) { warnings.push_back(w); };
  FallNet<float> net(tiny(), 9);
  const auto log = train_fall(net, data, opts);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("no fall"), std::string::npos);
  EXPECT_FALSE(log.back().train.recall().has_value());
  EXPECT_FALSE(single_class_warning(toy_data(6, 6, 8, 30)).has_value());
}

TEST(FallTrain, RejectsBadInput) {
  FallNet<float> net(tiny(), 10);
  EXPECT_THROW(train_fall(net, {}), Error);
  auto data = toy_data(7, 2, 8, 30);
  data[0].label = 2;
  EXPECT_THROW(train_fall(net, data), Error);
}
