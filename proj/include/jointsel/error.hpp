#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace jointsel {

enum class ErrorCode {
  kDimensionMismatch,
  kNonFiniteValue,
  kSingleClass,
  kInvalidLabel,
  kInvalidArgument,
  kLinearSolveFailure,
  kParseError,
  kIoError,
  kVersionMismatch,
  kInfeasibleConfig,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kNonFiniteValue: return "non-finite-value";
    case ErrorCode::kSingleClass: return "single-class";
    case ErrorCode::kInvalidLabel: return "invalid-label";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kLinearSolveFailure: return "linear-solve-failure";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kIoError: return "io-error";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kInfeasibleConfig: return "infeasible-config";
  }
  return "unknown";
}

/// Library-wide exception. Carries a machine-readable code and, where one
/// applies, the offending sample/feature index.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

  /// True for the failure classes that come from bad input data rather than
  /// from the numerical solvers.
  bool is_data_error() const noexcept {
    return code_ != ErrorCode::kLinearSolveFailure;
  }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace jointsel
