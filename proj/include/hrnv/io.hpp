#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hrnv/core.hpp"
#include "hrnv/report.hpp"

namespace hrnv {

enum class InputKind { ecg, rri, peaks };
enum class RriUnit { seconds, milliseconds };

std::string_view to_string(InputKind kind) noexcept;

struct InputDescriptor {
  std::filesystem::path path;
  InputKind kind = InputKind::rri;
  std::optional<double> fs;
  RriUnit rri_unit = RriUnit::seconds;
  std::string prefix;
  std::string postfix;

  std::string record_id() const;
};

using LoadedInput = std::variant<EcgRecord, IbiSeries, PeakAnnotations>;

/// Parses numbers stored in a single column or a single row. Separators are
/// commas, semicolons, tabs or spaces; blank lines are skipped. Parsing does
/// not depend on the C locale.
std::vector<double> parse_numeric_series(std::string_view text);

LoadedInput parse_signal(std::string_view text, InputKind kind, const std::string& record_id,
                         std::optional<double> fs, RriUnit unit = RriUnit::seconds);
LoadedInput read_signal(const InputDescriptor& desc);

/// Peaks file: "# record=<id>", "# fs_hz=<real>", optional
/// "# segment=<start>:<end>", then one sample index per line.
std::string format_peaks(const PeakAnnotations& peaks);
PeakAnnotations parse_peaks(std::string_view text);
void write_peaks(const std::filesystem::path& path, const PeakAnnotations& peaks);
PeakAnnotations read_peaks(const std::filesystem::path& path);

using ReportRow = std::variant<MetricsReport, RecordFailure>;

/// CSV table with one row per (record, n, m). Metric columns are grouped
/// per plan as hr{n}v{m}_{metric}; a row fills only its own plan's group.
/// Not-computable metrics are written as NA, and an `error` column is added
/// when failures are present.
std::string format_report(std::span<const ReportRow> rows);
std::string format_report(std::span<const MetricsReport> reports);
void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path);
void write_report(std::span<const MetricsReport> reports, const std::filesystem::path& path);

/// Re-reads a report table. Error rows are returned in `failures` when given.
std::vector<MetricsReport> parse_report(std::string_view text, std::vector<RecordFailure>* failures = nullptr);
std::vector<MetricsReport> read_report(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal string that round-trips, or `digits` significant digits.
std::string format_number(double value, int digits = 0);

}  // namespace hrnv
