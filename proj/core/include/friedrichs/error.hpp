#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace friedrichs {

enum class ErrorCode {
  InvalidInput,
  TrivialFormFactor,
  InvalidDispersion,
  DegenerateMaximum,
  NonUniqueMaximum,
  NoConvergence,
  BelowThreshold,
  QuadratureNotConverged,
  ExpansionFitFailed,
  Precondition,
  SizeError,
  FamilyMismatch,
  ConfigParse,
  Internal,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // True for violations of the non-degenerate unique maximum hypothesis.
  bool is_model_validity() const noexcept {
    return code_ == ErrorCode::DegenerateMaximum || code_ == ErrorCode::NonUniqueMaximum;
  }

 private:
  ErrorCode code_;
};

}  // namespace friedrichs
