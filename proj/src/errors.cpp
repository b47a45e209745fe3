#include "thinspectra/errors.hpp"

namespace thinspectra {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::NonInteriorOrigin: return "NonInteriorOrigin";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RegimeViolation: return "RegimeViolation";
    case ErrorCode::DegenerateCell: return "DegenerateCell";
    case ErrorCode::PointLocationFailure: return "PointLocationFailure";
    case ErrorCode::SingularMass: return "SingularMass";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::RootLoss: return "RootLoss";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::ClusterSkipped: return "ClusterSkipped";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace thinspectra
