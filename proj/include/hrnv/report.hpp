#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hrnv/nonlinear.hpp"
#include "hrnv/spectral.hpp"
#include "hrnv/time_metrics.hpp"

namespace hrnv {

/// Beat counts shown with a report. Only the (1, 1) report carries the
/// abnormal-beat breakdown of the original series.
struct BeatStatistics {
  bool detailed = false;
  std::optional<double> beat_count;
  std::optional<double> ibi_total;
  std::optional<double> ibi_abnormal;
  std::optional<double> ibi_clean;
  std::optional<double> ibi_clean_pct;
};

struct ReportField {
  std::string name;
  std::optional<double> value;
  /// False for columns that do not apply to this plan (written as an empty cell).
  bool applicable = true;
};

/// Full HR_nV_m metric set for one (record, n, m).
struct MetricsReport {
  std::string record_id;
  int n = 1;
  int m = 1;
  TimeMetrics time;
  FreqMetrics freq;
  NonlinearMetrics nonlinear;
  BeatStatistics beats;
  std::set<std::string> not_computable;

  /// Numeric metrics in column order.
  std::vector<ReportField> fields() const;
  /// Mutable access to a numeric metric by name; nullptr if unknown or a band edge.
  std::optional<double>* find(std::string_view name);
  /// Sets a band edge column (vlf_lo_hz ...). Returns false for other names.
  bool set_band_edge(std::string_view name, double value);
  /// Rebuilds not_computable from the applicable fields without a value.
  void mark_not_computable();

  friend bool operator==(const MetricsReport& a, const MetricsReport& b);
};

/// Column names of a plan's metric group, without the hr{n}v{m}_ prefix.
/// The text column "psd_method" is included at its position.
const std::vector<std::string>& report_metric_names();

std::string plan_prefix(int n, int m);

}  // namespace hrnv

namespace hrnv {

/// A record that failed somewhere in the pipeline. Batch tables carry these
/// as error rows.
struct RecordFailure {
  std::string record_id;
  std::string source;
  Errc code = Errc::IoError;
  std::string message;
};

}  // namespace hrnv
