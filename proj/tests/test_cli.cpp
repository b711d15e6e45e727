#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fallnet/fallnet.hpp"

namespace fs = std::filesystem;
using namespace fallnet;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("fallnet_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Outcome run(const std::string& args) const {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    const std::string cmd = std::string("'") + FALLNET_CLI + "' " + args + " >'" + out +
                            "' 2>'" + err + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  // Two single-person synthetic files plus one with two bodies per frame.
  void three_file_dataset(const std::string& sub) const {
    const std::string data = path(sub);
    ASSERT_EQ(run("synth --seed 4 --count 2 --fall-fraction 0.5 --min-frames 40 --max-frames 80 --out '" +
                  data + "'").code, 0);
    const auto seqs = synth::generate(9, 1, 0.0, {30, 30});
    std::string text = write_ntu_skeleton(seqs[0]);
    // Duplicate the body block of every frame.
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    std::getline(in, line);
    out << line << '\n';
    for (std::size_t f = 0; f < 30; ++f) {
      std::getline(in, line);  // body count
      std::vector<std::string> body;
      for (int k = 0; k < 27; ++k) {
        std::getline(in, line);
        body.push_back(line);
      }
      out << "2\n";
      for (int copy = 0; copy < 2; ++copy)
        for (const auto& b : body) out << b << '\n';
    }
    std::ofstream(fs::path(data) / "S009C002P001R001A010.skeleton") << out.str();
  }

  fs::path dir_;
};

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

// ------------------------------------------------------------------ synth

TEST_F(Cli, SynthFilesParseAndManifestCounts) {
  const Outcome r = run("synth --seed 3 --count 7 --fall-fraction 0.5 --min-frames 20 --max-frames 50 --out '" +
                    path("a") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("files=7 falls=4"), std::string::npos) << r.out;
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(path("a"))) {
    if (e.path().extension() != ".skeleton") continue;
    ++files;
    const auto p = load_ntu_file(e.path());
    EXPECT_FALSE(p.excluded()) << e.path();
  }
  EXPECT_EQ(files, 7u);
  std::istringstream manifest(slurp(path("a/labels.txt")));
  std::string line;
  std::size_t falls = 0;
  while (std::getline(manifest, line)) {
    if (line.empty() || line[0] == '#') continue;
    falls += line.back() == '1';
  }
  EXPECT_EQ(falls, 4u);
  EXPECT_TRUE(fs::exists(path("a/synth.run")));
}

TEST_F(Cli, SynthSeedStable) {
  ASSERT_EQ(run("synth --seed 5 --count 3 --out '" + path("a") + "'").code, 0);
  ASSERT_EQ(run("synth --seed 5 --count 3 --out '" + path("b") + "'").code, 0);
  for (const auto& e : fs::directory_iterator(path("a"))) {
    if (e.path().extension() == ".run") continue;  // the run record names its own directory
    EXPECT_EQ(slurp(e.path()), slurp(fs::path(path("b")) / e.path().filename())) << e.path();
  }
}

// ---------------------------------------------------------------- prepare

TEST_F(Cli, PrepareFiltersMultiPersonAndIsDeterministic) {
  three_file_dataset("data");
  const Outcome r = run("prepare --data '" + path("data") + "' --out '" + path("c1") + "' --frames 100");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("total=3 excluded=1 kept=2 falls=1 fall_ratio=0.5"), std::string::npos) << r.out;
  const auto train = load_cache(path("c1_train.ftcn")), test = load_cache(path("c1_test.ftcn"));
  EXPECT_EQ(train.records.size() + test.records.size(), 2u);
  EXPECT_EQ(train.joints, 16u);
  EXPECT_EQ(train.frames, 100u);
  ASSERT_EQ(run("prepare --data '" + path("data") + "' --out '" + path("c2") + "' --frames 100").code, 0);
  EXPECT_EQ(slurp(path("c1_train.ftcn")), slurp(path("c2_train.ftcn")));
  EXPECT_EQ(slurp(path("c1_test.ftcn")), slurp(path("c2_test.ftcn")));
  EXPECT_TRUE(fs::exists(path("c1_prepare.run")));
}

TEST_F(Cli, PrepareErrors) {
  Outcome r = run("prepare --data '" + path("missing") + "' --out '" + path("x") + "'");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("E_IO:", 0), 0u) << r.err;
  fs::create_directories(path("empty"));
  r = run("prepare --data '" + path("empty") + "' --out '" + path("x") + "'");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("E_INVALID_INPUT:", 0), 0u) << r.err;
}

// ------------------------------------------------------------- train-fall

class CliTrain : public Cli {
 protected:
  void SetUp() override {
    Cli::SetUp();
    SequenceCache cache{8, 40, {}};
    for (const auto& s : synth::generate(2, 12, 0.5, {20, 40}))
      cache.records.push_back(
          pad_to_length(select_joints(normalize_sequence(s), JointSet::core8()), 40));
    save_cache(path("train.ftcn"), cache);
  }
  static constexpr const char* kSmall = " --channels 8 --blocks 2 --batch 4 --lr 1e-3";
};

TEST_F(CliTrain, ZeroEpochsSavesInitialization) {
  const Outcome r = run("train-fall --seed 11 --epochs 0 --train '" + path("train.ftcn") + "' --out '" +
                    path("m.ck") + "'" + kSmall);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ck = nn::load_checkpoint(path("m.ck"));
  const auto cfg = FallNetConfig::from_kv(KeyValues::parse(ck.config));
  EXPECT_EQ(cfg.joints, 8u);
  EXPECT_EQ(cfg.frames, 40u);
  EXPECT_EQ(cfg.channels, 8u);
  FallNet<float> fresh(cfg, 11);
  const auto expect = nn::snapshot(ck.config, fresh.state());
  ASSERT_EQ(ck.entries.size(), expect.entries.size());
  for (std::size_t i = 0; i < ck.entries.size(); ++i) {
    EXPECT_EQ(ck.entries[i].name, expect.entries[i].name);
    EXPECT_EQ(ck.entries[i].values, expect.entries[i].values) << ck.entries[i].name;
  }
  EXPECT_EQ(count_lines(slurp(path("m.ck.log"))), 0u);
}

TEST_F(CliTrain, LogLinesAndSeedDeterminism) {
  for (const char* name : {"a.ck", "b.ck"}) {
    const Outcome r = run("train-fall --seed 3 --epochs 3 --train '" + path("train.ftcn") + "' --out '" +
                      path(name) + "'" + kSmall);
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const std::string log = slurp(path("a.ck.log"));
  EXPECT_EQ(count_lines(log), 3u);
  EXPECT_EQ(log.rfind("epoch=1 lr=0.001 loss=", 0), 0u) << log;
  EXPECT_NE(log.find("precision="), std::string::npos);
  EXPECT_EQ(slurp(path("a.ck")), slurp(path("b.ck")));
  EXPECT_EQ(log, slurp(path("b.ck.log")));
  const std::string run_record = slurp(path("a.ck.run"));
  EXPECT_NE(run_record.find("seed=3"), std::string::npos);
  EXPECT_NE(run_record.find("channels=8"), std::string::npos);
  EXPECT_NE(run_record.find("loss=ce"), std::string::npos);
}

TEST_F(CliTrain, OverfitModelScoresPerfectlyOnItsTrainingCache) {
  Outcome r = run("train-fall --seed 1 --epochs 80 --stop-at-perfect --dropout 0 --train '" +
              path("train.ftcn") + "' --out '" + path("m.ck") + "' --channels 16 --blocks 2 --batch 4 --lr 1e-3");
  ASSERT_EQ(r.code, 0) << r.err;
  r = run("eval --checkpoint '" + path("m.ck") + "' --data '" + path("train.ftcn") + "' --report '" +
          path("r.kv") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const EvalReport rep = parse_report_kv(slurp(path("r.kv")));
  ASSERT_TRUE(rep.confusion.has_value());
  EXPECT_EQ(rep.confusion->accuracy(), 1.0);
  EXPECT_EQ(rep.confusion->total(), 12u);
  EXPECT_NE(r.out.find("100.00%"), std::string::npos) << r.out;
}

// ------------------------------------------------------------------- eval

TEST_F(CliTrain, EvalReportRoundTripsAndThreadsAgree) {
  ASSERT_EQ(run("train-fall --seed 2 --epochs 1 --train '" + path("train.ftcn") + "' --out '" +
                path("m.ck") + "'" + kSmall).code, 0);
  Outcome r = run("eval --checkpoint '" + path("m.ck") + "' --data '" + path("train.ftcn") +
              "' --report '" + path("r1.kv") + "' --table '" + path("t1.txt") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(path("r1.kv"));
  const EvalReport rep = parse_report_kv(text);
  EXPECT_EQ(render_report_kv(rep), text);
  EXPECT_EQ(rep.params.at("fall"), metrics::count_params(*std::make_unique<FallNet<float>>(
                                       FallNetConfig::from_kv(KeyValues::parse(nn::load_checkpoint(path("m.ck")).config)))));
  EXPECT_EQ(slurp(path("t1.txt")), r.out);
  ASSERT_EQ(run("eval --threads 3 --checkpoint '" + path("m.ck") + "' --data '" + path("train.ftcn") +
                "' --report '" + path("r2.kv") + "'").code, 0);
  EXPECT_EQ(slurp(path("r2.kv")), text);
}

TEST_F(CliTrain, EvalEmptyCacheFailsWithoutReport) {
  ASSERT_EQ(run("train-fall --epochs 0 --train '" + path("train.ftcn") + "' --out '" + path("m.ck") + "'" +
                kSmall).code, 0);
  save_cache(path("empty.ftcn"), SequenceCache{8, 40, {}});
  const Outcome r = run("eval --checkpoint '" + path("m.ck") + "' --data '" + path("empty.ftcn") +
                    "' --report '" + path("r.kv") + "'");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("E_INVALID_INPUT:", 0), 0u) << r.err;
  EXPECT_FALSE(fs::exists(path("r.kv")));
}

TEST_F(CliTrain, EvalShapeMismatchNamesBothShapes) {
  ASSERT_EQ(run("train-fall --epochs 0 --train '" + path("train.ftcn") + "' --out '" + path("m.ck") + "'" +
                kSmall).code, 0);
  SequenceCache other{16, 40, {}};
  other.records.push_back({Tensor<float>({48, 40}), 0});
  save_cache(path("other.ftcn"), other);
  const Outcome r = run("eval --checkpoint '" + path("m.ck") + "' --data '" + path("other.ftcn") + "'");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("E_SHAPE:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("(24, 40)"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("(48, 40)"), std::string::npos) << r.err;
}

TEST_F(Cli, LiftingTrainAndEval) {
  Outcome r = run("train-lift --seed 1 --synthetic 64 --width 32 --epochs 2 --out '" + path("l.ck") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(slurp(path("l.ck.log"))), 2u);
  r = run("eval --seed 2 --synthetic 32 --checkpoint '" + path("l.ck") + "' --report '" + path("r.kv") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const EvalReport rep = parse_report_kv(slurp(path("r.kv")));
  EXPECT_EQ(rep.jdr.size(), 25u);
  for (const char* set : {"full25", "mid16", "core8"}) EXPECT_TRUE(rep.mjdr.count(set)) << set;
  EXPECT_TRUE(rep.params.count("lifting"));
}

// ------------------------------------------------------------------ bench

TEST_F(Cli, BenchKeysMatchAccounting) {
  const Outcome r = run("bench --model fall --channels 16 --frames 250 --iters 1 --warmup 0 --platform desk");
  ASSERT_EQ(r.code, 0) << r.err;
  const KeyValues kv = KeyValues::parse(r.out);
  FallNetConfig cfg;
  cfg.channels = 16;
  cfg.frames = 250;
  FallNet<float> net(cfg, 0);
  EXPECT_EQ(kv.require_number<std::size_t>("params"), metrics::count_params(net));
  EXPECT_EQ(kv.require_number<std::uint64_t>("flops"), metrics::count_flops(net.cost_plan(250)).total());
  EXPECT_GT(kv.require_number<double>("fps"), 0.0);
  EXPECT_EQ(kv.require("platform"), "desk");
  EXPECT_EQ(kv.require("low_confidence"), "true");
  EXPECT_EQ(kv.require_number<std::size_t>("iterations"), 1u);
}

// ------------------------------------------------------------ error policy

TEST_F(Cli, ErrorsAreSingleLineWithPrefixAndExitCode) {
  struct Case {
    std::string args, prefix;
    int code;
  };
  const std::vector<Case> cases = {
      {"", "E_USAGE:", 2},
      {"frobnicate", "E_USAGE:", 2},
      {"synth", "E_USAGE:", 2},
      {"bench --iters 0", "E_USAGE:", 2},
      {"bench --model tree --iters 1", "E_CONFIG:", 2},
      {"eval --checkpoint '" + path("nope.ck") + "' --data x", "E_IO:", 3},
      {"synth --out '" + path("s") + "' --config '" + path("nope.cfg") + "'", "E_IO:", 3},
  };
  for (const auto& c : cases) {
    const Outcome r = run(c.args);
    EXPECT_EQ(r.code, c.code) << c.args << "\n" << r.err;
    EXPECT_EQ(r.err.rfind(c.prefix, 0), 0u) << c.args << "\n" << r.err;
    EXPECT_EQ(count_lines(r.err), 1u) << c.args << "\n" << r.err;
  }
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  std::ofstream(path("run.cfg")) << "# synthetic run\ncount=4\nfall-fraction=0.5\nmin-frames=20\nmax-frames=30\n";
  Outcome r = run("synth --config '" + path("run.cfg") + "' --out '" + path("a") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("files=4 falls=2"), std::string::npos) << r.out;
  r = run("synth --config '" + path("run.cfg") + "' --count 2 --out '" + path("b") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("files=2 falls=1"), std::string::npos) << r.out;
  const std::string record = slurp(path("b/synth.run"));
  EXPECT_NE(record.find("count=2"), std::string::npos) << record;
  EXPECT_NE(record.find("max-frames=30"), std::string::npos) << record;
}
