#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace fallnet;

namespace {

LiftingConfig small_config(std::size_t joints = 25, std::size_t width = 32) {
  LiftingConfig c;
  c.joints = joints;
  c.hidden_width = width;
  return c;
}

std::vector<double> flatten(LiftingNet<double>& net) {
  std::vector<double> v;
  for (auto* p : net.parameters()) v.insert(v.end(), p->value.values().begin(), p->value.values().end());
  return v;
}

}  // namespace

TEST(LiftingNet, ZeroOutputLayerGivesZeros) {
  LiftingNet<double> net(small_config(), 3);
  net.output_layer().weight().value.fill(0.0);
  net.output_layer().bias().value.fill(0.0);
  const auto pairs = synth_pose_pairs(1, 4);
  for (const auto& pose : lift(net, std::vector<Pose2D>{pairs[0].input, pairs[1].input}))
    EXPECT_EQ(pose.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LiftingNet, IdenticalBatchRowsGiveIdenticalOutputs) {
  LiftingNet<double> net(small_config(), 5);
  const auto p = synth_pose_pairs(2, 1).front().input;
  const auto out = lift(net, std::vector<Pose2D>(6, p));
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LT((out[i] - out[0]).cwiseAbs().maxCoeff(), 1e-12);
  // Eval mode makes each pose independent of its batch mates.
  const auto other = synth_pose_pairs(3, 1).front().input;
  EXPECT_LT((lift(net, std::vector<Pose2D>{p, other}).front() - out[0]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LiftingNet, ShapesAndJointMismatch) {
  LiftingNet<double> net(small_config(), 1);
  const Tensor<double> y = net.forward(Tensor<double>({3, 50, 1}), nn::Mode::eval);
  EXPECT_EQ(y.shape(), (Shape{3, 75, 1}));
  EXPECT_THROW(net.forward(Tensor<double>({3, 32, 1}), nn::Mode::eval), Error);
  try {
    lift(net, Pose2D::Ones(16, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
}

TEST(LiftingNet, DefaultParameterCount) {
  LiftingNet<float> net;
  const double n = static_cast<double>(metrics::count_params(net));
  // Two linear maps around two residual blocks of width 736.
  const double w = 736, in = 50, out = 75;
  const double expected = (in * w + w) + 2 * w + 4 * (w * w + w + 2 * w) + (w * out + out);
  EXPECT_EQ(n, expected);
  EXPECT_NEAR(n, 2.2e6, 0.22e6);
}

TEST(LiftingNet, GradCheckTrainMode) {
  LiftingNet<double> net(small_config(8, 32), 11);
  std::mt19937_64 rng(12);
  const auto report = nn::grad_check(
      [&](const Tensor<double>& x) {
        net.reseed(99);
        return net.forward(x, nn::Mode::train);
      },
      [&](const Tensor<double>& g) { return net.backward(g); }, net.parameters(),
      oracle::random_tensor(rng, {4, 16, 1}));
  for (const auto& e : report.entries) {
    // A conv bias feeding train-mode batch norm has an exactly zero
    // gradient; its central difference is pure rounding, so compare it
    // absolutely.
    if (e.name.find("conv.bias") != std::string::npos && e.name != "lift.out.bias") {
      EXPECT_LT(std::abs(e.worst_analytic), 1e-12) << e.name;
      EXPECT_LT(std::abs(e.worst_numeric), 1e-8) << e.name;
    } else {
      EXPECT_LT(e.max_rel_error, 1e-4) << e.name;
    }
  }
}

TEST(LiftingTrain, ZeroLearningRateLeavesParameters) {
  LiftingNet<double> net(small_config(), 4);
  const auto before = flatten(net);
  LiftingTrainOptions opts;
  opts.epochs = 2;
  opts.schedule = nn::LrSchedule{0.0, nn::LrSchedule::Kind::step, {}, 0.1};
  train_lifting(net, synth_pose_pairs(6, 32), opts);
  EXPECT_EQ(flatten(net), before);
}

TEST(LiftingTrain, LossDecreasesAndStaysFinite) {
  LiftingNet<float> net(small_config(25, 128), 8);
  const auto pairs = synth_pose_pairs(9, 256);
  const double start = lifting_objective(net, pairs);
  LiftingTrainOptions opts;
  opts.epochs = 8;
  opts.schedule = nn::LrSchedule{1e-3, nn::LrSchedule::Kind::step, {}, 0.1};
  const auto curve = train_lifting(net, pairs, opts);
  ASSERT_EQ(curve.size(), 8u);
  for (const auto& e : curve) {
    EXPECT_TRUE(std::isfinite(e.train_loss));
    EXPECT_TRUE(std::isfinite(e.objective));
  }
  EXPECT_LT(curve.back().objective, start);
  EXPECT_LT(curve.back().train_loss, curve.front().train_loss);
}

TEST(LiftingObjective, InvariantToDuplication) {
  LiftingNet<double> net(small_config(), 2);
  auto pairs = synth_pose_pairs(10, 7);
  const double once = lifting_objective(net, pairs);
  auto doubled = pairs;
  doubled.insert(doubled.end(), pairs.begin(), pairs.end());
  EXPECT_NEAR(lifting_objective(net, doubled), once, 1e-12 * std::max(1.0, once));
  // Direct recomputation of the mean squared L2 error.
  double s = 0.0;
  for (const auto& p : pairs) s += (lift(net, p.input) - p.target).squaredNorm();
  EXPECT_NEAR(once, s / 7.0, 1e-12 * std::max(1.0, once));
}

TEST(LiftingData, SeedStable) {
  const auto a = synth_raw_pose_pairs(13, 5);
  const auto b = synth_raw_pose_pairs(13, 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(a[i].camera, b[i].camera);
  }
  EXPECT_NE(synth_raw_pose_pairs(14, 1)[0].camera, a[0].camera);
}

TEST(LiftingData, ImageIsPinholeProjection) {
  const synth::Camera cam;
  for (const auto& r : synth_raw_pose_pairs(15, 20)) {
    for (Eigen::Index j = 0; j < 25; ++j) {
      const double z = r.camera(j, 2);
      ASSERT_GT(z, 0.0);
      EXPECT_NEAR(r.image(j, 0), cam.fx * r.camera(j, 0) / z + cam.cx, 1e-9);
      EXPECT_NEAR(r.image(j, 1), cam.fy * r.camera(j, 1) / z + cam.cy, 1e-9);
    }
  }
}

TEST(LiftingData, NormalizedPairsRootCenteredUnitNorm) {
  for (const auto& p : synth_pose_pairs(16, 20)) {
    EXPECT_LT(p.input.row(kBaseSpine).norm(), 1e-12);
    EXPECT_LT(p.target.row(kBaseSpine).norm(), 1e-12);
    EXPECT_NEAR(p.input.norm(), 1.0, 1e-12);
    EXPECT_NEAR(p.target.norm(), 1.0, 1e-12);
  }
}

TEST(LiftingData, PairsFromSequencesHonourStride) {
  const auto seqs = synth::generate(17, 2, 0.5, {25, 25});
  EXPECT_EQ(pose_pairs_from_sequences(seqs, 10).size(), 6u);
  EXPECT_EQ(pose_pairs_from_sequences(seqs, 1).size(), 50u);
}
