#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace misbelief {

enum class ErrorKind {
  InvalidModel,
  DimensionMismatch,
  InvalidConstraint,
  IllConditioned,
  NonConvergence,
  InvalidScenario,
  NotApplicable,
  MismatchedSocieties,
  UnknownParameter,
  InvalidGrid,
  Parse,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it onto a stable exit code.
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

}  // namespace misbelief
