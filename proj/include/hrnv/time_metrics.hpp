#pragma once

#include <cmath>
#include <optional>
#include <unordered_map>

#include <Eigen/Core>

#include "hrnv/core.hpp"

namespace hrnv {

/// Histogram bin width for the triangular index, 1/128 s.
inline constexpr double kTriangularBinMs = 1000.0 / 128.0;

/// Sample mean.
template <typename Derived>
typename Derived::Scalar mean(const Eigen::MatrixBase<Derived>& x) {
  return x.sum() / static_cast<typename Derived::Scalar>(x.size());
}

/// Sample standard deviation (divisor size - 1).
template <typename Derived>
typename Derived::Scalar sample_std(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar mu = mean(x);
  return std::sqrt((x.array() - mu).square().sum() / static_cast<Scalar>(x.size() - 1));
}

template <typename Derived>
typename Derived::Scalar sample_variance(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar mu = mean(x);
  return (x.array() - mu).square().sum() / static_cast<Scalar>(x.size() - 1);
}

/// Root mean square of successive differences.
template <typename Derived>
typename Derived::Scalar rmssd(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  const auto diffs = x.tail(n - 1) - x.head(n - 1);
  return std::sqrt(diffs.squaredNorm() / static_cast<Scalar>(n - 1));
}

/// Number of successive differences whose magnitude is strictly above `limit`.
template <typename Derived>
Eigen::Index count_successive_above(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar limit) {
  const Eigen::Index n = x.size();
  return ((x.tail(n - 1) - x.head(n - 1)).array().abs() > limit).count();
}

/// Biased standardized central moment of order k (3 = skewness, 4 = kurtosis).
template <typename Derived>
typename Derived::Scalar standardized_moment(const Eigen::MatrixBase<Derived>& x, int k) {
  using Scalar = typename Derived::Scalar;
  const Scalar mu = mean(x);
  const auto centered = (x.array() - mu).eval();
  const Scalar m2 = centered.square().mean();
  return centered.pow(Scalar(k)).mean() / std::pow(m2, Scalar(k) / Scalar(2));
}

/// Series length over the tallest histogram bin, bins of `bin_width`
/// aligned at zero.
template <typename Derived>
typename Derived::Scalar triangular_index(const Eigen::MatrixBase<Derived>& x,
                                          typename Derived::Scalar bin_width) {
  using Scalar = typename Derived::Scalar;
  std::unordered_map<long long, Eigen::Index> counts;
  Eigen::Index tallest = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto bin = static_cast<long long>(std::floor(x(i) / bin_width));
    tallest = std::max(tallest, ++counts[bin]);
  }
  return static_cast<Scalar>(x.size()) / static_cast<Scalar>(tallest);
}

/// Time-domain metric set. Entries that cannot be evaluated are empty.
struct TimeMetrics {
  std::optional<double> avg_rr_ms;
  std::optional<double> sdrr_ms;
  std::optional<double> avg_hr_bpm;
  std::optional<double> sdhr_bpm;
  std::optional<double> rmssd_ms;
  std::optional<double> nn50x_count;
  std::optional<double> pnn50x_pct;
  std::optional<double> skewness;
  std::optional<double> kurtosis;
  std::optional<double> triangular_index;
};

/// Computes the time-domain metrics of `values_ms`; `n` sets the NN50x
/// threshold to n * 50 ms. Throws EmptySeries on an empty input.
TimeMetrics compute_time_metrics(const Eigen::VectorXd& values_ms, int n);
TimeMetrics compute_time_metrics(const RnimSeries& series);

}  // namespace hrnv
