#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ckm {

enum class ErrorKind {
  Shape,
  Parse,
  Parameter,
  Size,
  Infeasible,
  Precondition,
  Schema,
  CutRoundCap,
  Internal,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Size: return "size";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::CutRoundCap: return "cut_round_cap";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

/// Every error thrown by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

// Invariant breach inside an algorithm; indicates a bug, not bad input.
inline void ensure(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::Internal, "invariant violated: " + what);
}

}  // namespace ckm
