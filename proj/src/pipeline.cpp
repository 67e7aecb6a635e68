#include "hrnv/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace hrnv {

namespace {

void validate_settings(const AnalysisSettings& settings) {
  settings.preprocess.validate();
  settings.freq.validate();
  settings.entropy.validate();
}

}  // namespace

MetricsReport compute_report(const RnimSeries& series, const std::string& record_id,
                             const AnalysisSettings& settings) {
  MetricsReport report;
  report.record_id = record_id;
  report.n = series.n;
  report.m = series.m;
  report.freq.method = settings.freq.method;
  report.freq.vlf = settings.freq.vlf;
  report.freq.lf = settings.freq.lf;
  report.freq.hf = settings.freq.hf;

  try {
    report.time = compute_time_metrics(series);
  } catch (const Error&) {
  }
  try {
    report.freq = band_metrics(estimate_psd(series, settings.freq), settings.freq);
  } catch (const Error&) {
  }
  try {
    report.nonlinear = compute_nonlinear(series, settings.entropy, settings.dfa);
  } catch (const Error&) {
  }
  report.beats.beat_count = static_cast<double>(series.size());
  report.mark_not_computable();
  return report;
}

std::vector<MetricsReport> analyze_ibi(const IbiSeries& raw, const AnalysisSettings& settings) {
  validate_settings(settings);
  const auto plans = enumerate_plans(settings.mode, settings.n, settings.m);
  const IbiSeries cleaned = repair(flag_outliers(raw, settings.preprocess), settings.preprocess);

  std::vector<MetricsReport> reports;
  reports.reserve(plans.size());
  for (const auto& plan : plans) {
    auto report = compute_report(build_rrnim(cleaned, plan.n, plan.m), raw.record_id, settings);
    if (plan.n == 1 && plan.m == 1) {
      report.beats.detailed = true;
      report.beats.ibi_total = static_cast<double>(cleaned.stats.total);
      report.beats.ibi_abnormal = static_cast<double>(cleaned.stats.abnormal);
      report.beats.ibi_clean = static_cast<double>(cleaned.stats.clean);
      report.beats.ibi_clean_pct = cleaned.stats.clean_percent();
      report.mark_not_computable();
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<MetricsReport> analyze_peaks(const PeakAnnotations& peaks, const AnalysisSettings& settings) {
  return analyze_ibi(ibi_from_peaks(peaks), settings);
}

PeakAnnotations detect_for_settings(const EcgRecord& record, const AnalysisSettings& settings) {
  EcgRecord rec = record;
  if (settings.segment) rec.segment = settings.segment;
  rec.validate();
  if (settings.remove_baseline) rec = remove_baseline(rec);
  return detect_r_peaks(rec, settings.detector);
}

std::vector<MetricsReport> analyze_ecg(const EcgRecord& record, const AnalysisSettings& settings) {
  validate_settings(settings);
  return analyze_peaks(detect_for_settings(record, settings), settings);
}

std::vector<MetricsReport> analyze(const LoadedInput& input, const AnalysisSettings& settings) {
  return std::visit(
      [&](const auto& value) -> std::vector<MetricsReport> {
        using T = std::decay_t<decltype(value)>;
        if constexpr (std::is_same_v<T, EcgRecord>) {
          return analyze_ecg(value, settings);
        } else if constexpr (std::is_same_v<T, IbiSeries>) {
          return analyze_ibi(value, settings);
        } else {
          return analyze_peaks(value, settings);
        }
      },
      input);
}

std::vector<MetricsReport> analyze(const AnalysisRequest& request) {
  return analyze(read_signal(request.input), request.settings);
}

std::size_t BatchResult::failure_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const ReportRow& row) {
    return std::holds_alternative<RecordFailure>(row);
  }));
}

BatchResult analyze_batch(const std::vector<AnalysisRequest>& requests, unsigned jobs) {
  std::vector<std::vector<ReportRow>> per_record(requests.size());
  auto run_one = [&](std::size_t i) {
    const auto& req = requests[i];
    auto fail = [&](Errc code, const std::string& message) {
      per_record[i] = {RecordFailure{req.input.record_id(), req.input.path.string(), code, message}};
    };
    try {
      if (req.input.kind == InputKind::ecg && !req.unattended_ecg) {
        throw Error(Errc::BatchTypeViolation, "batch mode accepts ECG only with the unattended flag");
      }
      const auto reports = analyze(req);
      per_record[i].assign(reports.begin(), reports.end());
    } catch (const Error& e) {
      fail(e.code(), e.detail());
    } catch (const std::exception& e) {
      fail(Errc::IoError, e.what());
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(requests.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < requests.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < requests.size(); i = next++) run_one(i);
      });
    }
  }

  BatchResult result;
  for (auto& rows : per_record) {
    for (auto& row : rows) result.rows.push_back(std::move(row));
  }
  return result;
}

CountMismatchError::CountMismatchError(std::size_t first, std::size_t second)
    : Error(Errc::CountMismatch,
            "annotation counts differ: " + std::to_string(first) + " vs " + std::to_string(second)),
      first_(first),
      second_(second) {}

std::int64_t compare_annotations(const PeakAnnotations& a, const PeakAnnotations& b) {
  if (a.peaks.size() != b.peaks.size()) throw CountMismatchError(a.peaks.size(), b.peaks.size());
  std::int64_t total = 0;
  for (std::size_t i = 0; i < a.peaks.size(); ++i) total += std::abs(a.peaks[i] - b.peaks[i]);
  return total;
}

double relative_error(double candidate, double reference) noexcept {
  return std::abs(candidate - reference) / (std::abs(reference) + 1e-8);
}

std::vector<MetricComparison> compare_reports(const MetricsReport& candidate, const MetricsReport& reference) {
  if (candidate.record_id != reference.record_id || candidate.n != reference.n || candidate.m != reference.m) {
    throw Error(Errc::PlanMismatch, "cannot compare " + candidate.record_id + " " +
                                        plan_prefix(candidate.n, candidate.m) + " with " + reference.record_id +
                                        " " + plan_prefix(reference.n, reference.m));
  }
  const auto fc = candidate.fields();
  const auto fr = reference.fields();
  std::vector<MetricComparison> out;
  for (std::size_t i = 0; i < fc.size(); ++i) {
    if (!fc[i].applicable || !fr[i].applicable) continue;
    MetricComparison cmp;
    cmp.name = fc[i].name;
    cmp.status_agrees = fc[i].value.has_value() == fr[i].value.has_value();
    if (fc[i].value && fr[i].value) cmp.epsilon = relative_error(*fc[i].value, *fr[i].value);
    out.push_back(std::move(cmp));
  }
  return out;
}

}  // namespace hrnv
