#include "gaitml/error.hpp"

namespace gait {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::InsufficientRecordings: return "InsufficientRecordings";
    case ErrorCode::DurationTooShort: return "DurationTooShort";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::Io: return "Io";
    case ErrorCode::RecordingTooShort: return "RecordingTooShort";
    case ErrorCode::InvalidStrideForRate: return "InvalidStrideForRate";
    case ErrorCode::InvalidWindowConfig: return "InvalidWindowConfig";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::SeriesTooLong: return "SeriesTooLong";
    case ErrorCode::InvalidFeatureConfig: return "InvalidFeatureConfig";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::InvalidDims: return "InvalidDims";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InvalidTrainConfig: return "InvalidTrainConfig";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NotQuantized: return "NotQuantized";
    case ErrorCode::OutOfOrderSample: return "OutOfOrderSample";
    case ErrorCode::InconsistentBundle: return "InconsistentBundle";
  }
  return "Unknown";
}

}  // namespace gait
