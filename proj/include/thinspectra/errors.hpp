#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thinspectra {

enum class ErrorCode {
  BadDimension,
  NonInteriorOrigin,
  InvalidArgument,
  RegimeViolation,
  DegenerateCell,
  PointLocationFailure,
  SingularMass,
  FactorizationFailure,
  NotConverged,
  TooLarge,
  RootLoss,
  RegimeMismatch,
  OrderViolation,
  ClusterSkipped,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code lets
/// callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace thinspectra
