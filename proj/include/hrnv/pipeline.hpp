#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hrnv/io.hpp"
#include "hrnv/nonlinear.hpp"
#include "hrnv/preprocess.hpp"
#include "hrnv/qrs.hpp"
#include "hrnv/report.hpp"
#include "hrnv/spectral.hpp"
#include "hrnv/transform.hpp"

namespace hrnv {

/// Everything that configures one analysis apart from the input itself.
struct AnalysisSettings {
  std::optional<SampleRange> segment;
  bool remove_baseline = false;
  DetectorConfig detector;
  PreprocessConfig preprocess;
  PlanMode mode = PlanMode::single;
  int n = 1;
  std::optional<int> m = 1;
  FreqConfig freq;
  EntropyConfig entropy;
  DfaConfig dfa;
};

struct AnalysisRequest {
  InputDescriptor input;
  AnalysisSettings settings;
  /// Allows ECG inputs in batch mode (automatic detection, no review).
  bool unattended_ecg = false;
};

/// Computes all three metric families for one series. A family that cannot
/// be evaluated leaves its entries empty; nothing throws past this point.
MetricsReport compute_report(const RnimSeries& series, const std::string& record_id,
                             const AnalysisSettings& settings);

/// Flags and repairs the original intervals, then builds one report per plan.
/// The (1, 1) report carries the abnormal-beat breakdown.
std::vector<MetricsReport> analyze_ibi(const IbiSeries& raw, const AnalysisSettings& settings);
std::vector<MetricsReport> analyze_peaks(const PeakAnnotations& peaks, const AnalysisSettings& settings);
/// Optional baseline removal, R-peak detection over the segment, then analyze_peaks.
std::vector<MetricsReport> analyze_ecg(const EcgRecord& record, const AnalysisSettings& settings);
std::vector<MetricsReport> analyze(const LoadedInput& input, const AnalysisSettings& settings);
std::vector<MetricsReport> analyze(const AnalysisRequest& request);

/// Baseline removal (when requested) followed by detection, honoring the
/// segment in `settings` over the one stored on the record.
PeakAnnotations detect_for_settings(const EcgRecord& record, const AnalysisSettings& settings);

struct BatchResult {
  /// Input order preserved; each record contributes its plan rows or one failure row.
  std::vector<ReportRow> rows;

  std::size_t failure_count() const;
};

/// Runs every request, never aborting on a record failure. ECG inputs without
/// `unattended_ecg` become BatchTypeViolation failures. `jobs` bounds the
/// number of worker threads.
BatchResult analyze_batch(const std::vector<AnalysisRequest>& requests, unsigned jobs = 1);

/// Sum of absolute index differences between paired peaks. Throws
/// CountMismatchError when the counts differ.
std::int64_t compare_annotations(const PeakAnnotations& a, const PeakAnnotations& b);

class CountMismatchError : public Error {
 public:
  CountMismatchError(std::size_t first, std::size_t second);
  std::size_t first_count() const noexcept { return first_; }
  std::size_t second_count() const noexcept { return second_; }

 private:
  std::size_t first_;
  std::size_t second_;
};

/// |x_h - x_p| / (|x_p| + 1e-8).
double relative_error(double candidate, double reference) noexcept;

struct MetricComparison {
  std::string name;
  /// Present when both reports have a value.
  std::optional<double> epsilon;
  /// True when both sides agree on whether the metric is computable.
  bool status_agrees = true;
};

/// Per-metric relative error of `candidate` against `reference`. Throws
/// PlanMismatch when record or plan differ.
std::vector<MetricComparison> compare_reports(const MetricsReport& candidate, const MetricsReport& reference);

}  // namespace hrnv
