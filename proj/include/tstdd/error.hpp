#pragma once

#include <stdexcept>
#include <string>

namespace tstdd {

// Categories map onto CLI exit codes.
enum class ErrorKind {
  io,                // missing files, unreadable directories
  format,            // malformed or truncated on-disk data
  invalid_argument,  // contract violations by the caller
  numeric,           // solver failures, degenerate data
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return 3;
    case ErrorKind::format: return 4;
    case ErrorKind::invalid_argument: return 5;
    case ErrorKind::numeric: return 6;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::invalid_argument, what);
}

}  // namespace tstdd
