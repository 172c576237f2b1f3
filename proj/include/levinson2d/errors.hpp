#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace levinson2d {

enum class ErrorKind {
  domain_error,
  integration_failure,
  unsupported_origin,
  branch_ambiguity,
  not_converged,
  ill_conditioned,
  grid_insufficient,
  crossing_ambiguity,
  unsupported_regime,
  infinite_spectrum,
  excluded_case,
  out_of_validated_range,
  invalid_argument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain_error: return "domain_error";
    case ErrorKind::integration_failure: return "integration_failure";
    case ErrorKind::unsupported_origin: return "unsupported_origin";
    case ErrorKind::branch_ambiguity: return "branch_ambiguity";
    case ErrorKind::not_converged: return "not_converged";
    case ErrorKind::ill_conditioned: return "ill_conditioned";
    case ErrorKind::grid_insufficient: return "grid_insufficient";
    case ErrorKind::crossing_ambiguity: return "crossing_ambiguity";
    case ErrorKind::unsupported_regime: return "unsupported_regime";
    case ErrorKind::infinite_spectrum: return "infinite_spectrum";
    case ErrorKind::excluded_case: return "excluded_case";
    case ErrorKind::out_of_validated_range: return "out_of_validated_range";
    case ErrorKind::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

/// Every recoverable failure in the library is reported through this type;
/// `kind()` lets callers branch without parsing messages.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw SolverError(kind, what);
}

}  // namespace levinson2d
