#include "hrnv/time_metrics.hpp"

namespace hrnv {

TimeMetrics compute_time_metrics(const Eigen::VectorXd& values_ms, int n) {
  const Eigen::Index len = values_ms.size();
  if (len == 0) throw Error(Errc::EmptySeries, "no intervals");
  TimeMetrics out;
  out.avg_rr_ms = mean(values_ms);
  if (len < 2) return out;

  const Eigen::VectorXd hr = (60000.0 / values_ms.array()).matrix();
  out.sdrr_ms = sample_std(values_ms);
  out.avg_hr_bpm = mean(hr);
  out.sdhr_bpm = sample_std(hr);
  out.rmssd_ms = rmssd(values_ms);
  const auto nn = count_successive_above(values_ms, 50.0 * n);
  out.nn50x_count = static_cast<double>(nn);
  out.pnn50x_pct = static_cast<double>(nn) / static_cast<double>(len - 1) * 100.0;
  if ((values_ms.array() != values_ms[0]).any()) {
    out.skewness = standardized_moment(values_ms, 3);
    out.kurtosis = standardized_moment(values_ms, 4);
  }
  out.triangular_index = triangular_index(values_ms, kTriangularBinMs);
  return out;
}

TimeMetrics compute_time_metrics(const RnimSeries& series) {
  return compute_time_metrics(series.values_ms, series.n);
}

}  // namespace hrnv
