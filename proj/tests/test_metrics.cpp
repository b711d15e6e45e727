#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"

using namespace fallnet;
using metrics::Confusion;

namespace {

std::vector<Pose3D> jittered(const std::vector<Pose3D>& gt, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<Pose3D> out = gt;
  for (auto& p : out)
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] += n(rng);
  return out;
}

std::vector<Eigen::MatrixXd> as_dynamic(const std::vector<Pose3D>& v) {
  return {v.begin(), v.end()};
}

std::vector<Pose3D> random_poses(std::mt19937_64& rng, std::size_t n) {
  std::vector<Pose3D> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_pose(rng));
  return out;
}

}  // namespace

// --------------------------------------------------------------------- JDR

TEST(Jdr, PerfectPredictionDetectsEverything) {
  std::mt19937_64 rng(1);
  const auto gt = random_poses(rng, 10);
  const auto r = metrics::jdr(gt, gt);
  EXPECT_EQ(r.poses, 10u);
  for (double v : r.rates()) EXPECT_EQ(v, 1.0);
}

TEST(Jdr, ThresholdIsStrict) {
  Pose3D gt = Pose3D::Zero(25, 3);
  gt.row(kHead) << 0, 0, 0.5;  // threshold 0.25
  Pose3D pred = gt;
  pred(kLeftKnee, 0) += 0.25;
  pred(kRightKnee, 0) += 0.25 - 1e-12;
  const auto r = metrics::jdr({pred}, {gt});
  EXPECT_EQ(r.detected[kLeftKnee], 0u);
  EXPECT_EQ(r.detected[kRightKnee], 1u);
}

TEST(Jdr, MatchesBruteForceRecount) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 1 + seed % 17;
    const auto gt = random_poses(rng, n);
    const auto pred = jittered(gt, rng, 0.02 + 0.002 * static_cast<double>(seed));
    const auto r = metrics::jdr(pred, gt);
    std::size_t scored = 0;
    const auto hits = oracle::jdr_recount(as_dynamic(pred), as_dynamic(gt), kHead, kNeck, scored);
    ASSERT_EQ(r.poses, scored);
    ASSERT_EQ(r.detected, hits) << seed;
  }
}

TEST(Jdr, ScaleCovariant) {
  std::mt19937_64 rng(3);
  const auto gt = random_poses(rng, 30);
  const auto pred = jittered(gt, rng, 0.03);
  const auto base = metrics::jdr(pred, gt);
  // Powers of two keep the scaled comparisons bit-exact.
  for (double s : {0.125, 4.0, 64.0}) {
    std::vector<Pose3D> sp, sg;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      sp.push_back(pred[i] * s);
      sg.push_back(gt[i] * s);
    }
    EXPECT_EQ(metrics::jdr(sp, sg).detected, base.detected) << s;
  }
}

TEST(Jdr, DegeneratePoseExcluded) {
  std::mt19937_64 rng(4);
  auto gt = random_poses(rng, 3);
  gt[1].row(kHead) = gt[1].row(kNeck);
  const auto r = metrics::jdr(gt, gt);
  EXPECT_EQ(r.poses, 2u);
  EXPECT_EQ(r.excluded, 1u);
  EXPECT_EQ(r.rate(kHead), 1.0);
  EXPECT_THROW(metrics::jdr(gt, {gt[0]}), Error);
}

TEST(Mjdr, Means) {
  std::vector<double> rates(25, 1.0);
  EXPECT_EQ(metrics::mjdr(rates, JointSet::full25()), 1.0);
  rates[0] = 0.8;
  EXPECT_DOUBLE_EQ(metrics::mjdr(rates, JointSet::custom({0, 1})), 0.9);
  EXPECT_THROW(metrics::mjdr(std::vector<double>(10, 1.0), JointSet::mid16()), Error);
}

TEST(Mjdr, Mid16AboveFull25WhenExtremitiesAreWorst) {
  std::vector<double> rates(25, 0.95);
  const auto mid = JointSet::mid16();
  for (std::size_t j = 0; j < 25; ++j)
    if (!mid.contains(j)) rates[j] = 0.6;
  EXPECT_GT(metrics::mjdr(rates, mid), metrics::mjdr(rates, JointSet::full25()));
  EXPECT_DOUBLE_EQ(metrics::mjdr(rates, mid), 0.95);
}

// ----------------------------------------------------------- classification

TEST(Confusion, HandCountedExample) {
  const std::vector<int> labels = {1, 1, 0, 0}, preds = {1, 0, 0, 0};
  const auto c = metrics::confusion_metrics(preds, labels);
  EXPECT_EQ(c, (Confusion{1, 0, 1, 2}));
  EXPECT_EQ(c.accuracy(), 0.75);
  EXPECT_EQ(c.precision(), 1.0);
  EXPECT_EQ(c.recall(), 0.5);
}

TEST(Confusion, UndefinedRatesAndErrors) {
  const std::vector<int> none = {0, 0, 0}, some = {1, 0, 0};
  const auto c = metrics::confusion_metrics(none, some);
  EXPECT_FALSE(c.precision().has_value());
  EXPECT_EQ(c.recall(), 0.0);
  EXPECT_FALSE(metrics::confusion_metrics(none, none).recall().has_value());
  EXPECT_EQ(metrics::confusion_metrics(some, some).accuracy(), 1.0);
  EXPECT_THROW(metrics::confusion_metrics(std::vector<int>{}, std::vector<int>{}), Error);
  EXPECT_THROW(metrics::confusion_metrics(none, std::vector<int>{1}), Error);
}

TEST(Confusion, RecountAndPermutationInvariance) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.3 + 0.01 * static_cast<double>(seed));
    std::vector<int> p(5 + seed * 3), y(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = coin(rng);
      y[i] = coin(rng);
    }
    const auto c = metrics::confusion_metrics(p, y);
    const auto o = oracle::recount(p, y);
    ASSERT_EQ(c, (Confusion{o.tp, o.fp, o.fn, o.tn}));
    EXPECT_EQ(c.accuracy(), static_cast<double>(o.tp + o.tn) / static_cast<double>(p.size()));
    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pp, yy;
    for (std::size_t i : perm) {
      pp.push_back(p[i]);
      yy.push_back(y[i]);
    }
    EXPECT_EQ(metrics::confusion_metrics(pp, yy), c);
  }
}

// ---------------------------------------------------------------- accounting

TEST(Accounting, SingleConvParams) {
  struct OneConv {
    nn::Conv1d<float> conv{"c", 3, 2, 3, 1};
    std::vector<nn::Parameter<float>*> parameters() {
      std::vector<nn::Parameter<float>*> v;
      conv.collect(v);
      return v;
    }
  } m;
  EXPECT_EQ(metrics::count_params(m), 20u);
}

TEST(Accounting, FallNetFlopsMatchAnalyticSum) {
  const FallNetConfig cfg;
  FallNet<float> net(cfg, 0);
  const auto f = metrics::count_flops(net.cost_plan(300));
  const std::uint64_t c = 512, j3 = 48;
  const std::uint64_t lens[] = {298, 292, 274, 220, 58};
  std::uint64_t macs = j3 * c * 3 * lens[0];
  for (int n = 1; n <= 4; ++n) macs += c * c * 3 * lens[n] + c * c * 1 * lens[n];
  macs += c * 2;
  EXPECT_EQ(f.conv_macs, macs);
  std::uint64_t elem = 2 * c * lens[0];
  for (int n = 1; n <= 4; ++n) elem += 5 * c * lens[n];
  elem += c * lens[4];
  EXPECT_EQ(f.elementwise, elem);
  EXPECT_NEAR(static_cast<double>(f.total()), 0.9e9, 0.09e9);
}

TEST(Accounting, Budgets) {
  FallNet<float> fall;
  EXPECT_NEAR(static_cast<double>(metrics::count_params(fall)), 4.2e6, 0.21e6);
  LiftingNet<float> lift;
  EXPECT_NEAR(static_cast<double>(metrics::count_params(lift)), 2.2e6, 0.22e6);
  const auto lf = metrics::count_flops(lift.cost_plan());
  EXPECT_EQ(lf.conv_macs, 50u * 736 + 4u * 736 * 736 + 736u * 75);
}

// ----------------------------------------------------------------- bench

TEST(Bench, MedianAndConfidence) {
  int calls = 0;
  const auto r = metrics::bench_fps([&] { ++calls; }, 3, 1, "unit-test");
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(r.platform, "unit-test");
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_TRUE(r.low_confidence);
  EXPECT_FALSE(metrics::bench_fps([] {}, 0, 5, "x").low_confidence);
  EXPECT_THROW(metrics::bench_fps([] {}, 0, 0, "x"), Error);
}

TEST(Bench, StableAcrossRuns) {
  FallNetConfig cfg;
  cfg.channels = 64;
  FallNet<float> net(cfg, 1);
  const Tensor<float> x({1, 48, 300});
  auto once = [&] { net.forward(x, nn::Mode::eval); };
  const double a = metrics::bench_fps(once, 3, 15, "cpu").fps;
  const double b = metrics::bench_fps(once, 3, 15, "cpu").fps;
  EXPECT_LT(std::abs(a - b) / std::max(a, b), 0.2) << a << " vs " << b;
}

TEST(Bench, ScalesWithSequenceLength) {
  FallNetConfig cfg;
  cfg.channels = 64;
  cfg.blocks = 2;
  FallNet<float> net(cfg, 1);
  const Tensor<float> x300({1, 48, 300}), x150({1, 48, 150});
  const double f300 = metrics::bench_fps([&] { net.forward(x300, nn::Mode::eval); }, 3, 15, "cpu").fps;
  const double f150 = metrics::bench_fps([&] { net.forward(x150, nn::Mode::eval); }, 3, 15, "cpu").fps;
  const double ratio = f150 / f300;
  EXPECT_GE(ratio, 1.5);
  EXPECT_LE(ratio, 2.5);
}

// ----------------------------------------------------------------- report

TEST(Report, KeyValueRoundTrip) {
  EvalReport r;
  r.confusion = Confusion{7, 1, 2, 90};
  r.jdr["head"] = 0.1234567890123;
  r.jdr["l_knee"] = 1.0 / 3.0;
  r.mjdr["mid16"] = 0.875;
  r.params["fall"] = 4282882;
  r.flops["fall"] = 909465600;
  r.fps["cpu"] = 9.41;
  const std::string text = render_report_kv(r);
  EXPECT_NE(text.find("classification.accuracy="), std::string::npos);
  EXPECT_EQ(parse_report_kv(text), r);
  EXPECT_EQ(render_report_kv(parse_report_kv(text)), text);
}

TEST(Report, UndefinedMarkerRoundTrips) {
  EvalReport r;
  r.confusion = Confusion{0, 0, 0, 5};
  const std::string text = render_report_kv(r);
  EXPECT_NE(text.find("classification.precision=undefined"), std::string::npos);
  EXPECT_NE(text.find("classification.recall=undefined"), std::string::npos);
  EXPECT_EQ(parse_report_kv(text), r);
}

TEST(Report, RejectsInconsistentDocuments) {
  EvalReport r;
  r.confusion = Confusion{1, 0, 1, 2};
  std::string text = render_report_kv(r);
  std::string bad = text;
  bad.replace(bad.find("classification.tn=2"), 19, "classification.tn=3");
  EXPECT_THROW(parse_report_kv(bad), Error);
  EXPECT_THROW(parse_report_kv("jdr.head=1.5\n"), Error);
  EXPECT_THROW(parse_report_kv("speed.cpu=3\n"), Error);
}

TEST(Report, TableAlignsColumns) {
  EvalReport r;
  r.confusion = Confusion{1, 0, 1, 2};
  r.mjdr["full25"] = 0.8602;
  const std::string t = render_report_table(r);
  EXPECT_NE(t.find("75.00%"), std::string::npos);
  EXPECT_NE(t.find("100.00%"), std::string::npos);
  EXPECT_NE(t.find("86.02%"), std::string::npos);
  std::istringstream lines(t);
  std::string line;
  while (std::getline(lines, line))
    if (line.rfind("  ", 0) == 0) EXPECT_EQ(line.size(), 40u) << line;
}
