#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hrnv {

/// Failure categories raised by the library. Each maps onto a stable
/// identifier so that CLI output and HTTP payloads can report them.
enum class Errc {
  FewerThanTwoPeaks,
  SamplingRateTooLow,
  SegmentTooShort,
  InvalidConfig,
  UnknownPeak,
  DuplicatePeak,
  OutOfRange,
  NothingClean,
  InvalidParameters,
  EmptySeries,
  TooFewIntervals,
  TooShort,
  BurgOrderTooHigh,
  ZeroTotalPower,
  CountMismatch,
  PlanMismatch,
  BatchTypeViolation,
  MalformedNumeric,
  MixedLayout,
  EmptyFile,
  SchemaViolation,
  WriteFailure,
  IoError,
  NotFound,
  VersionConflict,
  ValidationError,
};

std::string_view to_string(Errc code) noexcept;
std::optional<Errc> parse_errc(std::string_view name) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  /// The message without the leading code name.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace hrnv
