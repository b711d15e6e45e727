#pragma once

#include <stdexcept>
#include <string>

namespace fallnet {

// Error categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  parse,           // malformed text input
  format,          // well-formed but wrong layout (joint count, magic, ...)
  invalid_input,   // precondition violated by the caller
  truncation,      // sequence longer than the fixed length
  shape,           // tensor shape mismatch or too-short input
  degenerate,      // geometrically degenerate pose
  config,          // bad hyperparameter or config value
  numeric,         // NaN / inf during training
  io,              // filesystem problems
};

inline const char* to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::parse: return "E_PARSE";
    case ErrorKind::format: return "E_FORMAT";
    case ErrorKind::invalid_input: return "E_INVALID_INPUT";
    case ErrorKind::truncation: return "E_TRUNCATION";
    case ErrorKind::shape: return "E_SHAPE";
    case ErrorKind::degenerate: return "E_DEGENERATE";
    case ErrorKind::config: return "E_CONFIG";
    case ErrorKind::numeric: return "E_NUMERIC";
    case ErrorKind::io: return "E_IO";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace fallnet
