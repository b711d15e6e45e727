#pragma once

#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "fallnet/config.hpp"
#include "fallnet/metrics.hpp"

namespace fallnet {

inline constexpr const char* kUndefined = "undefined";

struct EvalReport {
  std::optional<metrics::Confusion> confusion;
  std::map<std::string, double> jdr;   // joint name -> rate
  std::map<std::string, double> mjdr;  // joint set name -> rate
  std::map<std::string, std::uint64_t> params;
  std::map<std::string, std::uint64_t> flops;
  std::map<std::string, double> fps;   // platform tag -> frames per second

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

namespace detail {

inline std::string format_rate(std::optional<double> r) {
  if (!r) return kUndefined;
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * *r << '%';
  return os.str();
}

inline void check_rate(const std::string& key, double v) {
  if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::format, "report: " + key + " outside [0, 1]");
}

}  // namespace detail

// One metric per line as dotted.path=value; undefined rates are written as
// the literal marker. Numbers carry 17 significant digits so they read back
// exactly.
inline KeyValues report_to_kv(const EvalReport& r) {
  KeyValues kv;
  if (r.confusion) {
    const auto& c = *r.confusion;
    kv.set("classification.samples", c.total());
    kv.set("classification.tp", c.tp);
    kv.set("classification.fp", c.fp);
    kv.set("classification.fn", c.fn);
    kv.set("classification.tn", c.tn);
    kv.set("classification.accuracy", c.accuracy());
    if (auto p = c.precision()) kv.set("classification.precision", *p);
    else kv.set("classification.precision", kUndefined);
    if (auto q = c.recall()) kv.set("classification.recall", *q);
    else kv.set("classification.recall", kUndefined);
  }
  for (const auto& [k, v] : r.jdr) kv.set("jdr." + k, v);
  for (const auto& [k, v] : r.mjdr) kv.set("mjdr." + k, v);
  for (const auto& [k, v] : r.params) kv.set("params." + k, v);
  for (const auto& [k, v] : r.flops) kv.set("flops." + k, v);
  for (const auto& [k, v] : r.fps) kv.set("fps." + k, v);
  return kv;
}

inline std::string render_report_kv(const EvalReport& r) { return report_to_kv(r).render(); }

inline EvalReport parse_report_kv(const std::string& text) {
  const KeyValues kv = KeyValues::parse(text);
  EvalReport r;
  if (kv.has("classification.samples")) {
    metrics::Confusion c;
    c.tp = kv.require_number<std::size_t>("classification.tp");
    c.fp = kv.require_number<std::size_t>("classification.fp");
    c.fn = kv.require_number<std::size_t>("classification.fn");
    c.tn = kv.require_number<std::size_t>("classification.tn");
    if (c.total() != kv.require_number<std::size_t>("classification.samples")) {
      fail(ErrorKind::format, "report: confusion counts do not sum to the sample count");
    }
    const double acc = kv.require_number<double>("classification.accuracy");
    if (acc != c.accuracy()) fail(ErrorKind::format, "report: accuracy disagrees with counts");
    auto check_optional = [&](const std::string& key, std::optional<double> expected) {
      const std::string v = kv.require(key);
      if (v == kUndefined) {
        if (expected) fail(ErrorKind::format, "report: " + key + " marked undefined");
        return;
      }
      if (!expected || kv.require_number<double>(key) != *expected) {
        fail(ErrorKind::format, "report: " + key + " disagrees with counts");
      }
    };
    check_optional("classification.precision", c.precision());
    check_optional("classification.recall", c.recall());
    r.confusion = c;
  }
  for (const auto& [key, value] : kv.entries()) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) fail(ErrorKind::format, "report: key '" + key + "' has no section");
    const std::string section = key.substr(0, dot), name = key.substr(dot + 1);
    if (section == "classification") continue;
    if (section == "jdr" || section == "mjdr") {
      const double v = kv.require_number<double>(key);
      detail::check_rate(key, v);
      (section == "jdr" ? r.jdr : r.mjdr)[name] = v;
    } else if (section == "params") {
      r.params[name] = kv.require_number<std::uint64_t>(key);
    } else if (section == "flops") {
      r.flops[name] = kv.require_number<std::uint64_t>(key);
    } else if (section == "fps") {
      r.fps[name] = kv.require_number<double>(key);
    } else {
      fail(ErrorKind::format, "report: unknown section '" + section + "'");
    }
  }
  return r;
}

// Human-readable tables with aligned columns.
inline std::string render_report_table(const EvalReport& r) {
  std::ostringstream os;
  auto row = [&](const std::string& a, const std::string& b) {
    os << "  " << std::left << std::setw(24) << a << std::right << std::setw(14) << b << '\n';
  };
  if (r.confusion) {
    const auto& c = *r.confusion;
    os << "Classification (positive = fall)\n";
    row("samples", std::to_string(c.total()));
    row("tp / fp / fn / tn", std::to_string(c.tp) + "/" + std::to_string(c.fp) + "/" +
                                 std::to_string(c.fn) + "/" + std::to_string(c.tn));
    row("accuracy", detail::format_rate(c.accuracy()));
    row("precision", detail::format_rate(c.precision()));
    row("recall", detail::format_rate(c.recall()));
  }
  if (!r.jdr.empty()) {
    os << "Joint detection rate\n";
    for (const auto& [k, v] : r.jdr) row(k, detail::format_rate(v));
  }
  if (!r.mjdr.empty()) {
    os << "Mean JDR\n";
    for (const auto& [k, v] : r.mjdr) row(k, detail::format_rate(v));
  }
  if (!r.params.empty() || !r.flops.empty()) {
    os << "Model cost\n";
    for (const auto& [k, v] : r.params) row(k + " params", std::to_string(v));
    for (const auto& [k, v] : r.flops) row(k + " flops", std::to_string(v));
  }
  if (!r.fps.empty()) {
    os << "Throughput (fps)\n";
    for (const auto& [k, v] : r.fps) {
      std::ostringstream f;
      f << std::fixed << std::setprecision(2) << v;
      row(k, f.str());
    }
  }
  return os.str();
}

}  // namespace fallnet
