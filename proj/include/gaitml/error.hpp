#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gait {

/// Failure categories raised by the pipeline. Each public operation throws
/// gait::Error carrying one of these.
enum class ErrorCode {
  // dataset
  MissingColumn,
  NonMonotonicTimestamps,
  RateMismatch,
  EmptyFile,
  MalformedRow,
  InvalidValue,
  InsufficientRecordings,
  DurationTooShort,
  InvalidManifest,
  Io,
  // windowing
  RecordingTooShort,
  InvalidStrideForRate,
  InvalidWindowConfig,
  // features
  EmptySeries,
  SeriesTooLong,
  InvalidFeatureConfig,
  EmptyTrainingSet,
  // model
  InvalidDims,
  DimensionMismatch,
  EmptyDataset,
  InvalidTrainConfig,
  // anomaly
  TooFewPoints,
  // metrics
  LengthMismatch,
  EmptyInput,
  // deploy
  BadMagic,
  UnsupportedVersion,
  ChecksumMismatch,
  TruncatedFile,
  NotQuantized,
  OutOfOrderSample,
  InconsistentBundle,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gait
