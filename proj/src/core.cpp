#include "hrnv/core.hpp"

#include <utility>

namespace hrnv {

SampleRange EcgRecord::analysis_range() const {
  if (segment) return *segment;
  return {0, static_cast<SampleIndex>(samples.size())};
}

void EcgRecord::validate() const {
  if (!(fs > 0.0)) throw Error(Errc::InvalidParameters, "sampling rate must be positive");
  if (samples.size() == 0) throw Error(Errc::InvalidParameters, "record has no samples");
  if (segment) {
    const auto n = static_cast<SampleIndex>(samples.size());
    if (segment->start < 0 || segment->start >= segment->end || segment->end > n) {
      throw Error(Errc::InvalidParameters,
                  "segment " + std::to_string(segment->start) + ":" + std::to_string(segment->end) +
                      " outside 0:" + std::to_string(n));
    }
  }
}

IbiSeries IbiSeries::from_intervals(std::string record_id, Eigen::VectorXd intervals_ms) {
  for (Eigen::Index i = 0; i < intervals_ms.size(); ++i) {
    if (!(intervals_ms[i] > 0.0)) {
      throw Error(Errc::InvalidParameters,
                  "interval " + std::to_string(i) + " is not positive");
    }
  }
  IbiSeries out;
  out.record_id = std::move(record_id);
  out.onset_times_ms = cumulative_sum(intervals_ms);
  out.intervals_ms = std::move(intervals_ms);
  out.flags.assign(static_cast<std::size_t>(out.intervals_ms.size()), BeatFlag::clean);
  out.stats.total = out.flags.size();
  out.stats.clean = out.flags.size();
  return out;
}

Eigen::VectorXd cumulative_sum(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc += x[i];
    out[i] = acc;
  }
  return out;
}

IbiSeries ibi_from_peaks(const PeakAnnotations& peaks) {
  if (peaks.peaks.size() < 2) {
    throw Error(Errc::FewerThanTwoPeaks, "record '" + peaks.record_id + "' has " +
                                             std::to_string(peaks.peaks.size()) + " peak(s)");
  }
  if (!(peaks.fs > 0.0)) throw Error(Errc::InvalidParameters, "sampling rate must be positive");
  const auto count = static_cast<Eigen::Index>(peaks.peaks.size()) - 1;
  Eigen::VectorXd intervals(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto delta = peaks.peaks[static_cast<std::size_t>(i) + 1] - peaks.peaks[static_cast<std::size_t>(i)];
    intervals[i] = static_cast<double>(delta) / peaks.fs * 1000.0;
  }
  return IbiSeries::from_intervals(peaks.record_id, std::move(intervals));
}

std::string extract_record_id(std::string_view filename, std::string_view prefix,
                              std::string_view postfix) {
  if (filename.size() >= prefix.size() + postfix.size() && filename.starts_with(prefix) &&
      filename.ends_with(postfix)) {
    auto stripped = filename.substr(prefix.size(), filename.size() - prefix.size() - postfix.size());
    if (!stripped.empty()) return std::string(stripped);
  }
  return std::string(filename);
}

}  // namespace hrnv
