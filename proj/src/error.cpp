#include "themis/error.hpp"

namespace themis {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::ChannelOutOfRange: return "ChannelOutOfRange";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::DegenerateBatch: return "DegenerateBatch";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::TrimExhaustsData: return "TrimExhaustsData";
    case ErrorCode::PartitionMismatch: return "PartitionMismatch";
    case ErrorCode::TooFewPeaks: return "TooFewPeaks";
    case ErrorCode::MissingArtifacts: return "MissingArtifacts";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EigensolveFailure:
    case ErrorCode::TooFewPeaks:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Input;
  }
}

std::string_view module_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingFile:
    case ErrorCode::BadHeader:
    case ErrorCode::ChannelOutOfRange:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::ParseError:
    case ErrorCode::NonBinaryLabel:
    case ErrorCode::EmptySeries:
    case ErrorCode::LengthMismatch:
      return "dataset_io";
    case ErrorCode::IoError:
    case ErrorCode::DimensionOverflow:
    case ErrorCode::BadMagic:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::TruncatedPayload:
    case ErrorCode::UnsupportedDtype:
      return "embedding_store";
    case ErrorCode::DegenerateBatch:
    case ErrorCode::PartitionMismatch:
      return "similarity";
    case ErrorCode::InvalidParameter:
    case ErrorCode::EigensolveFailure:
    case ErrorCode::TooFewPoints:
    case ErrorCode::TrimExhaustsData:
      return "adapters";
    case ErrorCode::TooFewPeaks:
      return "thresholding";
    case ErrorCode::MissingArtifacts:
      return "cli";
  }
  return "themis";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> row)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), row_(row) {}

}  // namespace themis
