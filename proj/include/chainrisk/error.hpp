#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chainrisk {

/// Stable machine-readable error codes shared by every module.
enum class ErrorCode {
  kMalformed,
  kRange,
  kUnknownTask,
  kMissingDuration,
  kInfeasible,
  kUnknownMethod,
  kUnknownTerm,
  kOutOfUniverse,
  kEmptySet,
  kDegenerate,
  kEmptyGate,
  kTooManyStrategies,
  kInvalidInput,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying an ErrorCode. The message already includes any
/// location (line, row, column, task id) that applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace chainrisk
