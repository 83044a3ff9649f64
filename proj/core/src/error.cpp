#include "facelve/error.hpp"

namespace facelve {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::EmptySelection: return "empty-selection";
    case ErrorCode::DegenerateWeights: return "degenerate-weights";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::InsufficientClasses: return "insufficient-classes";
    case ErrorCode::DegenerateAxis: return "degenerate-axis";
    case ErrorCode::UnknownAxis: return "unknown-axis";
    case ErrorCode::DuplicateAxis: return "duplicate-axis";
    case ErrorCode::NoUnlockedFeatures: return "no-unlocked-features";
    case ErrorCode::LockedFeature: return "locked-feature";
    case ErrorCode::FeatureUnavailable: return "feature-unavailable";
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::BackendUnavailable: return "backend-unavailable";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::UnsupportedVersion: return "unsupported-version";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::SessionFinished: return "session-finished";
    case ErrorCode::ScreeningFailure: return "screening-failure";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace facelve
