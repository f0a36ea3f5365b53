#pragma once

#include <stdexcept>
#include <string>

namespace isocal {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNotAPermutation,
  kBudgetExceeded,
  kPrecondition,
  kParse,
  kNotFound,
  kUndefined,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kNotAPermutation: return "not_a_permutation";
    case ErrorCode::kBudgetExceeded: return "budget_exceeded";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kUndefined: return "undefined";
  }
  return "unknown";
}

/// Every failure raised by the library. The code is stable and meant for
/// programmatic dispatch; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace isocal
