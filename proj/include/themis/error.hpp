#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace themis {

enum class ErrorCode {
  // dataset_io
  MissingFile,
  BadHeader,
  ChannelOutOfRange,
  NonFiniteValue,
  ParseError,
  NonBinaryLabel,
  EmptySeries,
  LengthMismatch,
  // embedding_store
  IoError,
  DimensionOverflow,
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  UnsupportedDtype,
  // similarity / adapters
  DegenerateBatch,
  InvalidParameter,
  EigensolveFailure,
  TooFewPoints,
  TrimExhaustsData,
  PartitionMismatch,
  // thresholding
  TooFewPeaks,
  // cli
  MissingArtifacts,
};

/// Input errors map to CLI exit code 1, numerical failures to exit code 2.
enum class ErrorCategory { Input, Numerical };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category_of(ErrorCode code) noexcept;
/// Library module that raises the code, used to tag CLI messages.
std::string_view module_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> row = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }
  /// Zero-based data row for row-level input errors.
  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> row_;
};

}  // namespace themis
