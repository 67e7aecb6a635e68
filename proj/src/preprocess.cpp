#include "hrnv/preprocess.hpp"

#include <algorithm>
#include <array>
#include <variant>

#include "hrnv/interp.hpp"

namespace hrnv {

void PreprocessConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(Errc::InvalidConfig, "outlier threshold must lie in (0, 1)");
  }
}

IbiSeries flag_outliers(const IbiSeries& ibi, const PreprocessConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = ibi.size();
  if (n < 1) throw Error(Errc::EmptySeries, "no intervals to flag");
  constexpr Eigen::Index half = PreprocessConfig::neighborhood / 2;

  IbiSeries out = ibi;
  out.flags.assign(static_cast<std::size_t>(n), BeatFlag::clean);
  out.stats = {};
  std::array<double, PreprocessConfig::neighborhood> window{};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
    const auto count = static_cast<std::size_t>(hi - lo + 1);
    std::copy(ibi.intervals_ms.data() + lo, ibi.intervals_ms.data() + hi + 1, window.begin());
    std::sort(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(count));
    const double med = count % 2 == 1 ? window[count / 2]
                                      : 0.5 * (window[count / 2 - 1] + window[count / 2]);
    if (std::abs(ibi.intervals_ms[i] - med) / med > cfg.threshold) {
      out.flags[static_cast<std::size_t>(i)] = BeatFlag::non_sinus;
      ++out.stats.abnormal;
    }
  }
  out.stats.total = static_cast<std::size_t>(n);
  out.stats.clean = out.stats.total - out.stats.abnormal;
  return out;
}

namespace {

using Interpolant = std::variant<LinearInterpolant<double>, CubicSpline<double>, Pchip<double>>;

Interpolant make_interpolant(RepairAction action, Eigen::VectorXd t, Eigen::VectorXd v) {
  switch (action) {
    case RepairAction::spline: return CubicSpline<double>(std::move(t), std::move(v));
    case RepairAction::pchip: return Pchip<double>(std::move(t), std::move(v));
    default: return LinearInterpolant<double>(std::move(t), std::move(v));
  }
}

}  // namespace

IbiSeries repair(const IbiSeries& ibi, const PreprocessConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = ibi.size();
  if (static_cast<Eigen::Index>(ibi.flags.size()) != n) {
    throw Error(Errc::InvalidParameters, "flags missing; run flag_outliers first");
  }
  std::vector<Eigen::Index> clean_idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ibi.flags[static_cast<std::size_t>(i)] != BeatFlag::non_sinus) clean_idx.push_back(i);
  }
  if (clean_idx.empty()) throw Error(Errc::NothingClean, "every interval is flagged");
  if (static_cast<Eigen::Index>(clean_idx.size()) == n) return ibi;

  std::vector<double> values;
  std::vector<BeatFlag> flags;
  values.reserve(static_cast<std::size_t>(n));
  flags.reserve(static_cast<std::size_t>(n));
  std::size_t fallback_removed = 0;

  if (cfg.action == RepairAction::remove) {
    for (auto i : clean_idx) {
      values.push_back(ibi.intervals_ms[i]);
      flags.push_back(ibi.flags[static_cast<std::size_t>(i)]);
    }
  } else {
    const auto k = static_cast<Eigen::Index>(clean_idx.size());
    Eigen::VectorXd t(k), v(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      t[j] = ibi.onset_times_ms[clean_idx[static_cast<std::size_t>(j)]];
      v[j] = ibi.intervals_ms[clean_idx[static_cast<std::size_t>(j)]];
    }
    std::optional<Interpolant> interp;
    if (k >= 2) interp = make_interpolant(cfg.action, t, v);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto flag = ibi.flags[static_cast<std::size_t>(i)];
      if (flag != BeatFlag::non_sinus) {
        values.push_back(ibi.intervals_ms[i]);
        flags.push_back(flag);
        continue;
      }
      const double at = ibi.onset_times_ms[i];
      double value;
      if (at <= t[0]) {
        value = v[0];
      } else if (at >= t[k - 1]) {
        value = v[k - 1];
      } else {
        value = std::visit([at](const auto& f) { return f(at); }, *interp);
      }
      if (!(value > 0.0)) {
        ++fallback_removed;
        continue;
      }
      values.push_back(value);
      flags.push_back(BeatFlag::interpolated);
    }
  }

  IbiSeries out;
  out.record_id = ibi.record_id;
  out.intervals_ms = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  out.onset_times_ms = cumulative_sum(out.intervals_ms);
  out.flags = std::move(flags);
  out.stats = ibi.stats;
  out.stats.fallback_removed = fallback_removed;
  return out;
}

}  // namespace hrnv
