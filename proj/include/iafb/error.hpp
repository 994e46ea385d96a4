#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iafb {

enum class ErrorKind {
  InvalidInput,
  InvalidProfile,
  DegenerateChannel,
  UnsupportedSize,
  UnsupportedCase,
  InvalidStrategy,
  InvalidState,
  InfeasibleAtStart,
  SpaceTooLarge,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidProfile: return "invalid-profile";
    case ErrorKind::DegenerateChannel: return "degenerate-channel";
    case ErrorKind::UnsupportedSize: return "unsupported-size";
    case ErrorKind::UnsupportedCase: return "unsupported-case";
    case ErrorKind::InvalidStrategy: return "invalid-strategy";
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::InfeasibleAtStart: return "infeasible-at-start";
    case ErrorKind::SpaceTooLarge: return "space-too-large";
  }
  return "unknown";
}

// All library failures are reported through this one exception type; callers
// branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace iafb
