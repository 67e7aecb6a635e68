#include "hrnv/error.hpp"

namespace hrnv {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::FewerThanTwoPeaks: return "FewerThanTwoPeaks";
    case Errc::SamplingRateTooLow: return "SamplingRateTooLow";
    case Errc::SegmentTooShort: return "SegmentTooShort";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::UnknownPeak: return "UnknownPeak";
    case Errc::DuplicatePeak: return "DuplicatePeak";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::NothingClean: return "NothingClean";
    case Errc::InvalidParameters: return "InvalidParameters";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::TooFewIntervals: return "TooFewIntervals";
    case Errc::TooShort: return "TooShort";
    case Errc::BurgOrderTooHigh: return "BurgOrderTooHigh";
    case Errc::ZeroTotalPower: return "ZeroTotalPower";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::PlanMismatch: return "PlanMismatch";
    case Errc::BatchTypeViolation: return "BatchTypeViolation";
    case Errc::MalformedNumeric: return "MalformedNumeric";
    case Errc::MixedLayout: return "MixedLayout";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::WriteFailure: return "WriteFailure";
    case Errc::IoError: return "IoError";
    case Errc::NotFound: return "NotFound";
    case Errc::VersionConflict: return "VersionConflict";
    case Errc::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

std::optional<Errc> parse_errc(std::string_view name) noexcept {
  for (int c = 0; c <= static_cast<int>(Errc::ValidationError); ++c) {
    if (to_string(static_cast<Errc>(c)) == name) return static_cast<Errc>(c);
  }
  return std::nullopt;
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace hrnv
