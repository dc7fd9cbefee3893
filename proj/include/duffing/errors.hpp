#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace duffing {

enum class ErrorCode {
  invalid_argument,
  invalid_dimension,
  dimension_mismatch,
  non_hermitian,
  degenerate_kernel,
  iteration_limit,
  eigensolver_failure,
  parameter_pole,
  bracket_failure,
  degenerate_request,
  fit_failure,
  window_too_narrow,
  onset_not_found,
  invalid_config,
  io_failure,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::non_hermitian: return "non-hermitian";
    case ErrorCode::degenerate_kernel: return "degenerate-kernel";
    case ErrorCode::iteration_limit: return "iteration-limit";
    case ErrorCode::eigensolver_failure: return "eigensolver-failure";
    case ErrorCode::parameter_pole: return "parameter-pole";
    case ErrorCode::bracket_failure: return "bracket-failure";
    case ErrorCode::degenerate_request: return "degenerate-request";
    case ErrorCode::fit_failure: return "fit-failure";
    case ErrorCode::window_too_narrow: return "window-too-narrow";
    case ErrorCode::onset_not_found: return "onset-not-found";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::io_failure: return "io-failure";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace duffing
