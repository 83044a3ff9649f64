#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facelve {

enum class ErrorCode {
  InvalidDimension,
  DimensionMismatch,
  EmptySelection,
  DegenerateWeights,
  OutOfRange,
  InsufficientClasses,
  DegenerateAxis,
  UnknownAxis,
  DuplicateAxis,
  NoUnlockedFeatures,
  LockedFeature,
  FeatureUnavailable,
  Configuration,
  Unsupported,
  BackendUnavailable,
  Parse,
  UnsupportedVersion,
  Validation,
  NotFound,
  SessionFinished,
  ScreeningFailure,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// The single exception type thrown by the library. The code is what callers
/// branch on (the HTTP layer maps it to a status); the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  /// Offending input field, when the error is tied to one.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace facelve
