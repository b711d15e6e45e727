// fallnet command-line driver.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fallnet/fallnet.hpp"

namespace fs = std::filesystem;
using namespace fallnet;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return 2;
    case ErrorKind::numeric: return 4;
    default: return 3;
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::io, "cannot write " + path);
  os << text;
  if (!os) fail(ErrorKind::io, "write failed for " + path);
}

// Writes next to the target and renames, so a crash never leaves a torn file.
void save_checkpoint_atomic(const std::string& path, const nn::Checkpoint& ck) {
  const std::string tmp = path + ".tmp";
  nn::save_checkpoint(tmp, ck);
  fs::rename(tmp, path);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      fail(ErrorKind::config, "invalid integer '" + item + "' in list '" + text + "'");
    }
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

std::string fmt_rate(std::optional<double> v) { return v ? fmt_double(*v) : kUndefined; }

// Resolved value of every option of a subcommand, for the run record.
KeyValues resolved_options(const CLI::App& sub, const std::string& command) {
  KeyValues kv;
  kv.set("command", command);
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      // Options keep their last value (config file first, then flags).
      value = opt->results().back();
    } else {
      value = opt->get_default_str();
      if (value.empty() && opt->get_expected_max() == 0) value = "false";
    }
    kv.set(name, value);
  }
  return kv;
}

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "flat key=value file; flags override it");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--threads", c.threads, "worker threads for evaluation")
      ->check(CLI::PositiveNumber);
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
  std::string out;
  std::size_t count = 32;
  double fall_fraction = 0.5;
  std::size_t min_frames = 60;
  std::size_t max_frames = 300;
};

int cmd_synth(const SynthArgs& a, const Common& c, const CLI::App& sub) {
  if (a.min_frames < 1 || a.min_frames > a.max_frames)
    fail(ErrorKind::config, "need 1 <= min-frames <= max-frames");
  fs::create_directories(a.out);
  const auto seqs = synth::generate(c.seed, a.count, a.fall_fraction,
                                    {a.min_frames, a.max_frames});
  std::string manifest = "# file action fall\n";
  std::size_t falls = 0;
  for (std::size_t n = 0; n < seqs.size(); ++n) {
    const auto& s = seqs[n];
    NtuFileInfo info{static_cast<int>(n / 999 + 1), ntu_camera_id(s.camera_angle),
                     s.subject_id, static_cast<int>(n % 999 + 1), s.action_label};
    const std::string name = ntu_filename(info);
    write_text((fs::path(a.out) / name).string(), write_ntu_skeleton(s));
    manifest += name + " " + std::to_string(s.action_label) + " " +
                (s.is_fall() ? "1" : "0") + "\n";
    falls += s.is_fall() ? 1 : 0;
  }
  write_text((fs::path(a.out) / "labels.txt").string(), manifest);
  KeyValues run = resolved_options(sub, "synth");
  run.set("seed", c.seed);
  write_text((fs::path(a.out) / "synth.run").string(), run.render());
  std::cout << "files=" << seqs.size() << " falls=" << falls << "\n";
  return 0;
}

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
  std::string data;
  std::string out;
  std::string joints = "mid16";
  std::size_t frames = kDefaultFrames;
};

int cmd_prepare(const PrepareArgs& a, const CLI::App& sub, const Common& c) {
  if (!fs::is_directory(a.data)) fail(ErrorKind::io, "cannot read directory " + a.data);
  const JointSet set = JointSet::by_name(a.joints);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.data))
    if (e.is_regular_file() && e.path().extension() == ".skeleton") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<SkeletonSequence> kept;
  std::size_t excluded = 0;
  for (const auto& f : files) {
    const NtuParseResult r = load_ntu_file(f);
    if (r.excluded()) {
      ++excluded;
      continue;
    }
    for (const auto& body : r.bodies) kept.push_back(body);
  }
  if (kept.empty()) {
    fail(ErrorKind::invalid_input, "no usable samples in " + a.data + " (" +
                                       std::to_string(files.size()) + " files, " +
                                       std::to_string(excluded) + " excluded)");
  }
  const auto [train, test] = split_by_camera(kept);
  auto build = [&](const std::vector<SkeletonSequence>& seqs) {
    SequenceCache cache{set.size(), a.frames, {}};
    for (const auto& s : seqs)
      cache.records.push_back(pad_to_length(select_joints(normalize_sequence(s), set), a.frames));
    return cache;
  };
  const SequenceCache train_cache = build(train), test_cache = build(test);
  save_cache(a.out + "_train.ftcn", train_cache);
  save_cache(a.out + "_test.ftcn", test_cache);
  KeyValues run = resolved_options(sub, "prepare");
  run.set("seed", c.seed);
  write_text(a.out + "_prepare.run", run.render());

  const std::size_t falls = train_cache.fall_count() + test_cache.fall_count();
  std::cout << "total=" << files.size() << " excluded=" << excluded << " kept=" << kept.size()
            << " falls=" << falls
            << " fall_ratio=" << fmt_double(static_cast<double>(falls) / static_cast<double>(kept.size()))
            << " train=" << train_cache.records.size() << " test=" << test_cache.records.size()
            << "\n";
  return 0;
}

// ------------------------------------------------------------- train-fall

struct TrainFallArgs {
  std::string train;
  std::string out;
  std::string log;
  int epochs = 20;
  std::size_t batch = 16;
  double lr = 1e-4;
  std::string schedule = "step";
  std::string milestones;
  double decay = 0.1;
  std::size_t channels = 512;
  std::size_t blocks = 4;
  double dropout = 0.25;
  std::string loss = "ce";
  bool stop_at_perfect = false;
};

nn::LrSchedule make_schedule(double lr, const std::string& kind, const std::string& milestones,
                             double decay) {
  nn::LrSchedule s;
  s.base_lr = lr;
  s.factor = decay;
  s.milestones = parse_int_list(milestones);
  if (kind == "step") s.kind = nn::LrSchedule::Kind::step;
  else if (kind == "exponential") s.kind = nn::LrSchedule::Kind::exponential;
  else fail(ErrorKind::config, "schedule must be step or exponential, got '" + kind + "'");
  return s;
}

int cmd_train_fall(const TrainFallArgs& a, const Common& c, const CLI::App& sub) {
  const SequenceCache cache = load_cache(a.train);
  if (cache.records.empty()) fail(ErrorKind::invalid_input, "training cache " + a.train + " is empty");
  FallNetConfig cfg;
  cfg.joints = cache.joints;
  cfg.frames = cache.frames;
  cfg.channels = a.channels;
  cfg.blocks = a.blocks;
  cfg.dropout = a.dropout;
  layer_output_sizes(cfg);  // rejects T too short for the stack

  FallTrainOptions opts;
  opts.epochs = a.epochs;
  opts.batch_size = a.batch;
  opts.schedule = make_schedule(a.lr, a.schedule, a.milestones, a.decay);
  opts.seed = c.seed;
  opts.stop_at_perfect = a.stop_at_perfect;
  opts.eval_threads = c.threads;
  if (a.loss == "ce") opts.weights = nn::ClassWeights::uniform();
  else if (a.loss == "wce") opts.weights = nn::ClassWeights::fall_weighted();
  else fail(ErrorKind::config, "loss must be ce or wce, got '" + a.loss + "'");
  opts.on_warning = [](const std::string& w) { std::cerr << "warning: " << w << "\n"; };

  KeyValues model_kv = cfg.to_kv();
  model_kv.set("loss", a.loss);
  const std::string config_text = model_kv.render();

  FallNet<float> net(cfg, c.seed);
  save_checkpoint_atomic(a.out, nn::snapshot(config_text, net.state()));
  KeyValues run = resolved_options(sub, "train-fall");
  run.merge(model_kv);
  run.set("seed", c.seed);
  write_text(a.out + ".run", run.render());

  const std::string log_path = a.log.empty() ? a.out + ".log" : a.log;
  std::ofstream log(log_path, std::ios::binary);
  if (!log) fail(ErrorKind::io, "cannot write " + log_path);
  train_fall(net, cache.records, opts, [&](const FallEpoch& e) {
    save_checkpoint_atomic(a.out, nn::snapshot(config_text, net.state()));
    log << "epoch=" << e.epoch + 1 << " lr=" << fmt_double(e.lr) << " loss=" << fmt_double(e.loss)
        << " accuracy=" << fmt_double(e.train.accuracy())
        << " precision=" << fmt_rate(e.train.precision())
        << " recall=" << fmt_rate(e.train.recall()) << "\n";
    log.flush();
    std::cout << "epoch " << e.epoch + 1 << "/" << a.epochs << " loss " << fmt_double(e.loss)
              << " acc " << fmt_double(e.train.accuracy()) << std::endl;
  });
  return 0;
}

// ------------------------------------------------------------- train-lift

struct TrainLiftArgs {
  std::string data;
  std::size_t synthetic = 0;
  std::size_t stride = 10;
  std::string out;
  std::string log;
  int epochs = 60;
  std::size_t batch = 16;
  double lr = 1e-4;
  std::string schedule = "step";
  std::string milestones = "20,40";
  double decay = 0.1;
  std::size_t width = 736;
  std::size_t blocks = 2;
  double dropout = 0.25;
};

std::vector<PosePair> lifting_pairs(const std::string& dir, std::size_t synthetic,
                                    std::size_t stride, std::uint64_t seed) {
  if (!dir.empty() && synthetic > 0) fail(ErrorKind::config, "use either --data or --synthetic");
  if (synthetic > 0) return synth_pose_pairs(seed, synthetic);
  if (dir.empty()) fail(ErrorKind::config, "lifting needs --data DIR or --synthetic N");
  if (!fs::is_directory(dir)) fail(ErrorKind::io, "cannot read directory " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".skeleton") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<SkeletonSequence> seqs;
  for (const auto& f : files) {
    const auto r = load_ntu_file(f);
    if (!r.excluded()) seqs.insert(seqs.end(), r.bodies.begin(), r.bodies.end());
  }
  auto pairs = pose_pairs_from_sequences(seqs, stride);
  if (pairs.empty()) fail(ErrorKind::invalid_input, "no 2D/3D pose pairs found in " + dir);
  return pairs;
}

int cmd_train_lift(const TrainLiftArgs& a, const Common& c, const CLI::App& sub) {
  const auto pairs = lifting_pairs(a.data, a.synthetic, a.stride, c.seed);
  LiftingConfig cfg;
  cfg.joints = static_cast<std::size_t>(pairs.front().input.rows());
  cfg.hidden_width = a.width;
  cfg.blocks = a.blocks;
  cfg.dropout = a.dropout;
  LiftingTrainOptions opts;
  opts.epochs = a.epochs;
  opts.batch_size = a.batch;
  opts.schedule = make_schedule(a.lr, a.schedule, a.milestones, a.decay);
  opts.seed = c.seed;

  const std::string config_text = cfg.to_kv().render();
  LiftingNet<float> net(cfg, c.seed);
  save_checkpoint_atomic(a.out, nn::snapshot(config_text, net.state()));
  KeyValues run = resolved_options(sub, "train-lift");
  run.merge(cfg.to_kv());
  run.set("seed", c.seed);
  run.set("pairs", pairs.size());
  write_text(a.out + ".run", run.render());

  const std::string log_path = a.log.empty() ? a.out + ".log" : a.log;
  std::ofstream log(log_path, std::ios::binary);
  if (!log) fail(ErrorKind::io, "cannot write " + log_path);
  train_lifting(net, pairs, opts, [&](const LiftingEpoch& e) {
    save_checkpoint_atomic(a.out, nn::snapshot(config_text, net.state()));
    log << "epoch=" << e.epoch + 1 << " lr=" << fmt_double(e.lr)
        << " loss=" << fmt_double(e.train_loss) << " objective=" << fmt_double(e.objective)
        << " steps=" << e.steps << "\n";
    log.flush();
    std::cout << "epoch " << e.epoch + 1 << "/" << a.epochs << " objective "
              << fmt_double(e.objective) << std::endl;
  });
  return 0;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::size_t synthetic = 0;
  std::size_t stride = 10;
  std::string report;
  std::string table;
};

std::string model_kind(const KeyValues& kv) {
  const std::string m = kv.get("model", "");
  if (m != "fall" && m != "lifting") {
    fail(ErrorKind::format, "checkpoint config names unknown model '" + m + "'");
  }
  return m;
}

int cmd_eval(const EvalArgs& a, const Common& c) {
  const nn::Checkpoint ck = nn::load_checkpoint(a.checkpoint);
  const KeyValues kv = KeyValues::parse(ck.config);
  EvalReport report;
  if (model_kind(kv) == "fall") {
    if (a.data.empty()) fail(ErrorKind::config, "fall evaluation needs --data CACHE");
    FallNet<float> net(FallNetConfig::from_kv(kv));
    nn::restore(ck, net.state());
    const SequenceCache cache = load_cache(a.data);
    if (cache.records.empty()) fail(ErrorKind::invalid_input, "evaluation cache " + a.data + " is empty");
    const auto& cfg = net.config();
    if (cache.joints != cfg.joints || cache.frames != cfg.frames) {
      fail(ErrorKind::shape, "checkpoint expects (" + std::to_string(3 * cfg.joints) + ", " +
                                 std::to_string(cfg.frames) + ") sequences, cache holds (" +
                                 std::to_string(3 * cache.joints) + ", " +
                                 std::to_string(cache.frames) + ")");
    }
    report.confusion = evaluate_fall(net, cache.records, c.threads);
    report.params["fall"] = metrics::count_params(net);
    report.flops["fall"] = metrics::count_flops(net.cost_plan(cfg.frames)).total();
  } else {
    LiftingNet<float> net(LiftingConfig::from_kv(kv));
    nn::restore(ck, net.state());
    const auto pairs = lifting_pairs(a.data, a.synthetic, a.stride, c.seed);
    std::vector<Pose2D> in;
    std::vector<Pose3D> gt;
    for (const auto& p : pairs) {
      in.push_back(p.input);
      gt.push_back(p.target);
    }
    const auto res = metrics::jdr(lift(net, in), gt);
    if (res.excluded > 0) {
      std::cerr << "warning: " << res.excluded << " poses with coincident head and neck excluded\n";
    }
    if (res.poses == 0) fail(ErrorKind::invalid_input, "no poses left to score");
    const auto rates = res.rates();
    if (rates.size() == kNumJoints) {
      for (std::size_t j = 0; j < rates.size(); ++j) report.jdr[std::string(kJointNames[j])] = rates[j];
      for (auto set : {JointSet::full25(), JointSet::mid16(), JointSet::core8()})
        report.mjdr[std::string(to_string(set.name()))] = metrics::mjdr(rates, set);
    } else {
      for (std::size_t j = 0; j < rates.size(); ++j) report.jdr["joint" + std::to_string(j)] = rates[j];
    }
    report.params["lifting"] = metrics::count_params(net);
    report.flops["lifting"] = metrics::count_flops(net.cost_plan()).total();
  }
  const std::string table = render_report_table(report);
  std::cout << table;
  if (!a.report.empty()) write_text(a.report, render_report_kv(report));
  if (!a.table.empty()) write_text(a.table, table);
  return 0;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
  std::string checkpoint;
  std::string model = "fall";
  std::size_t joints = 16;
  std::size_t frames = kDefaultFrames;
  std::size_t channels = 512;
  std::size_t iters = 10;
  std::size_t warmup = 2;
  std::string platform = "cpu";
};

int cmd_bench(const BenchArgs& a, const Common& c) {
  KeyValues out;
  std::string model = a.model;
  KeyValues ckv;
  std::optional<nn::Checkpoint> ck;
  if (!a.checkpoint.empty()) {
    ck = nn::load_checkpoint(a.checkpoint);
    ckv = KeyValues::parse(ck->config);
    model = model_kind(ckv);
  }
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  metrics::BenchResult r;
  if (model == "fall") {
    FallNetConfig cfg;
    if (ck) {
      cfg = FallNetConfig::from_kv(ckv);
    } else {
      cfg.joints = a.joints;
      cfg.channels = a.channels;
    }
    cfg.frames = a.frames;
    FallNet<float> net(cfg, c.seed);
    if (ck) nn::restore(*ck, net.state());
    Tensor<float> x({1, 3 * cfg.joints, cfg.frames});
    for (auto& v : x.values()) v = normal(rng);
    const auto flops = metrics::count_flops(net.cost_plan(cfg.frames));
    out.set("params", metrics::count_params(net));
    out.set("flops", flops.total());
    out.set("conv_macs", flops.conv_macs);
    out.set("frames", cfg.frames);
    r = metrics::bench_fps([&] { net.forward(x, nn::Mode::eval); }, a.warmup, a.iters, a.platform);
  } else if (model == "lifting") {
    LiftingConfig cfg;
    if (ck) cfg = LiftingConfig::from_kv(ckv);
    LiftingNet<float> net(cfg, c.seed);
    if (ck) nn::restore(*ck, net.state());
    Tensor<float> x({1, 2 * cfg.joints, 1});
    for (auto& v : x.values()) v = normal(rng);
    const auto flops = metrics::count_flops(net.cost_plan());
    out.set("params", metrics::count_params(net));
    out.set("flops", flops.total());
    out.set("conv_macs", flops.conv_macs);
    r = metrics::bench_fps([&] { net.forward(x, nn::Mode::eval); }, a.warmup, a.iters, a.platform);
  } else {
    fail(ErrorKind::config, "model must be fall or lifting, got '" + model + "'");
  }
  out.set("model", model);
  out.set("platform", r.platform);
  out.set("iterations", r.iterations);
  out.set("median_seconds", r.median_seconds);
  out.set("fps", r.fps);
  out.set("low_confidence", r.low_confidence ? "true" : "false");
  std::cout << out.render();
  return 0;
}

// Config-file values are placed ahead of the user's own flags; options
// keep their last value, so flags override the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.size() < 2) return args;
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const KeyValues kv = KeyValues::load(path);
  std::vector<std::string> out{args[0], args[1]};
  for (const auto& [k, v] : kv.entries()) out.push_back("--" + k + "=" + v);
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skeleton-based fall detection toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);

  Common common;

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write synthetic NTU-layout skeleton files");
  add_common(synth, common);
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--count", synth_args.count, "number of sequences");
  synth->add_option("--fall-fraction", synth_args.fall_fraction, "share of falls")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--min-frames", synth_args.min_frames);
  synth->add_option("--max-frames", synth_args.max_frames);

  PrepareArgs prep_args;
  auto* prepare = app.add_subcommand("prepare", "parse, filter, normalize and cache sequences");
  add_common(prepare, common);
  prepare->add_option("--data", prep_args.data, "directory of .skeleton files")->required();
  prepare->add_option("--out", prep_args.out, "output prefix; writes PREFIX_train/test.ftcn")
      ->required();
  prepare->add_option("--joints", prep_args.joints, "full25, mid16 or core8")
      ->check(CLI::IsMember({"full25", "mid16", "core8"}));
  prepare->add_option("--frames", prep_args.frames, "fixed sequence length");

  TrainFallArgs tf;
  auto* train_fall_cmd = app.add_subcommand("train-fall", "train the fall classifier");
  add_common(train_fall_cmd, common);
  train_fall_cmd->add_option("--train", tf.train, "training cache")->required();
  train_fall_cmd->add_option("--out", tf.out, "checkpoint path")->required();
  train_fall_cmd->add_option("--log", tf.log, "epoch log (default: OUT.log)");
  train_fall_cmd->add_option("--epochs", tf.epochs)->check(CLI::NonNegativeNumber);
  train_fall_cmd->add_option("--batch", tf.batch)->check(CLI::PositiveNumber);
  train_fall_cmd->add_option("--lr", tf.lr);
  train_fall_cmd->add_option("--schedule", tf.schedule, "step or exponential");
  train_fall_cmd->add_option("--milestones", tf.milestones, "comma-separated decay epochs");
  train_fall_cmd->add_option("--decay", tf.decay, "decay factor");
  train_fall_cmd->add_option("--channels", tf.channels);
  train_fall_cmd->add_option("--blocks", tf.blocks);
  train_fall_cmd->add_option("--dropout", tf.dropout);
  train_fall_cmd->add_option("--loss", tf.loss, "ce or wce");
  train_fall_cmd->add_flag("--stop-at-perfect", tf.stop_at_perfect,
                           "stop once training accuracy reaches 1");

  TrainLiftArgs tl;
  auto* train_lift_cmd = app.add_subcommand("train-lift", "train the 2D-to-3D lifting network");
  add_common(train_lift_cmd, common);
  train_lift_cmd->add_option("--data", tl.data, "directory of .skeleton files with 2D joints");
  train_lift_cmd->add_option("--synthetic", tl.synthetic, "use N synthetic pose pairs");
  train_lift_cmd->add_option("--stride", tl.stride, "frame stride when sampling poses");
  train_lift_cmd->add_option("--out", tl.out, "checkpoint path")->required();
  train_lift_cmd->add_option("--log", tl.log, "epoch log (default: OUT.log)");
  train_lift_cmd->add_option("--epochs", tl.epochs)->check(CLI::NonNegativeNumber);
  train_lift_cmd->add_option("--batch", tl.batch)->check(CLI::PositiveNumber);
  train_lift_cmd->add_option("--lr", tl.lr);
  train_lift_cmd->add_option("--schedule", tl.schedule, "step or exponential");
  train_lift_cmd->add_option("--milestones", tl.milestones, "comma-separated decay epochs");
  train_lift_cmd->add_option("--decay", tl.decay);
  train_lift_cmd->add_option("--width", tl.width);
  train_lift_cmd->add_option("--blocks", tl.blocks);
  train_lift_cmd->add_option("--dropout", tl.dropout);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, common);
  eval->add_option("--checkpoint", ev.checkpoint)->required();
  eval->add_option("--data", ev.data, "cache (fall) or skeleton directory (lifting)");
  eval->add_option("--synthetic", ev.synthetic, "lifting: score N synthetic pose pairs");
  eval->add_option("--stride", ev.stride);
  eval->add_option("--report", ev.report, "key-value report path");
  eval->add_option("--table", ev.table, "text table path");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "count parameters and FLOPs, time inference");
  add_common(bench, common);
  bench->add_option("--checkpoint", bn.checkpoint);
  bench->add_option("--model", bn.model, "fall or lifting");
  bench->add_option("--joints", bn.joints);
  bench->add_option("--frames", bn.frames);
  bench->add_option("--channels", bn.channels);
  bench->add_option("--iters", bn.iters)->check(CLI::PositiveNumber);
  bench->add_option("--warmup", bn.warmup);
  bench->add_option("--platform", bn.platform, "platform tag recorded in the output");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(args);
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      std::cerr << "E_USAGE: " << msg << "\n";
      return 2;
    }
    if (synth->parsed()) return cmd_synth(synth_args, common, *synth);
    if (prepare->parsed()) return cmd_prepare(prep_args, *prepare, common);
    if (train_fall_cmd->parsed()) return cmd_train_fall(tf, common, *train_fall_cmd);
    if (train_lift_cmd->parsed()) return cmd_train_lift(tl, common, *train_lift_cmd);
    if (eval->parsed()) return cmd_eval(ev, common);
    if (bench->parsed()) return cmd_bench(bn, common);
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << to_string(e.kind()) << ": " << msg << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "E_IO: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
