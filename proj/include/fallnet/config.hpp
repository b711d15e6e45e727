#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "fallnet/error.hpp"

namespace fallnet {

// Flat key=value text: one pair per line, '#' starts a comment, keys are
// unique and kept sorted so the rendered text is canonical.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) {
        if (end == text.size()) break;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        fail(ErrorKind::parse, "config line " + std::to_string(line_no) +
                                   ": expected key=value");
      }
      const std::string key(trim(line.substr(0, eq)));
      if (key.empty()) {
        fail(ErrorKind::parse, "config line " + std::to_string(line_no) + ": empty key");
      }
      kv.values_[key] = std::string(trim(line.substr(eq + 1)));
      if (end == text.size()) break;
    }
    return kv;
  }

  static KeyValues load(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::io, "cannot read config " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse(buf.str());
  }

  std::string render() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  void set(const std::string& key, const char* value) { values_[key] = value; }
  template <typename N>
  void set(const std::string& key, N value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    values_[key] = os.str();
  }

  // Values from `other` win.
  void merge(const KeyValues& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) fail(ErrorKind::config, "missing config key '" + key + "'");
    return it->second;
  }

  template <typename N>
  N get_number(const std::string& key, N fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_number<N>(key, it->second);
  }

  template <typename N>
  N require_number(const std::string& key) const {
    return to_number<N>(key, require(key));
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
      s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    return s;
  }

  template <typename N>
  static N to_number(const std::string& key, const std::string& text) {
    N value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      fail(ErrorKind::config, "config key '" + key + "': invalid number '" + text + "'");
    }
    return value;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace fallnet
