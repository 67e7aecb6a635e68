#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hrnv/error.hpp"

namespace hrnv {

using SampleIndex = std::int64_t;

/// Half-open range of sample indices, [start, end).
struct SampleRange {
  SampleIndex start = 0;
  SampleIndex end = 0;

  SampleIndex length() const noexcept { return end - start; }
  bool contains(SampleIndex i) const noexcept { return i >= start && i < end; }
  friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

/// Single-channel ECG trace.
struct EcgRecord {
  std::string record_id;
  double fs = 0.0;
  Eigen::VectorXd samples;
  std::optional<SampleRange> segment;

  /// The selected segment, or the whole trace when none is set.
  SampleRange analysis_range() const;
  /// Throws InvalidParameters when fs or the segment break the invariants.
  void validate() const;
};

/// Ordered R-peak sample indices. `version` counts accepted edit batches.
struct PeakAnnotations {
  std::string record_id;
  double fs = 0.0;
  std::vector<SampleIndex> peaks;
  std::uint64_t version = 0;
  std::optional<SampleRange> segment;
};

enum class BeatFlag { clean, non_sinus, interpolated };

struct IbiStats {
  std::size_t total = 0;
  std::size_t abnormal = 0;
  std::size_t clean = 0;
  /// Intervals dropped because interpolation produced a non-positive value.
  std::size_t fallback_removed = 0;

  double clean_percent() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(clean) / static_cast<double>(total) * 100.0;
  }
};

/// Inter-beat intervals in milliseconds. onset_times_ms[i] is the running
/// sum of intervals_ms[0..i].
struct IbiSeries {
  std::string record_id;
  Eigen::VectorXd intervals_ms;
  Eigen::VectorXd onset_times_ms;
  std::vector<BeatFlag> flags;
  IbiStats stats;

  Eigen::Index size() const noexcept { return intervals_ms.size(); }

  /// Builds an all-clean series. Throws InvalidParameters on a non-positive
  /// interval.
  static IbiSeries from_intervals(std::string record_id, Eigen::VectorXd intervals_ms);
};

/// An RR_nI_m series: sums of n consecutive intervals taken every m beats.
/// times_ms carries the time axis used by the spectral estimators.
struct RnimSeries {
  int n = 1;
  int m = 1;
  Eigen::VectorXd values_ms;
  Eigen::VectorXd times_ms;
  Eigen::Index source_len = 0;

  Eigen::Index size() const noexcept { return values_ms.size(); }
};

/// Left-to-right running sum.
Eigen::VectorXd cumulative_sum(const Eigen::VectorXd& x);

IbiSeries ibi_from_peaks(const PeakAnnotations& peaks);

/// Strips `prefix` and `postfix` from `filename` when both match, otherwise
/// returns the full name.
std::string extract_record_id(std::string_view filename, std::string_view prefix,
                              std::string_view postfix);

}  // namespace hrnv
