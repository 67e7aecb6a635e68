#pragma once

#include <compare>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hrnv/core.hpp"

namespace hrnv {

/// Length of an RR_nI_m series built from N intervals: floor((N - n + 1) / m),
/// or zero when N < n.
constexpr Eigen::Index rrnim_length(Eigen::Index source_len, Eigen::Index n, Eigen::Index m) {
  return source_len < n ? 0 : (source_len - n + 1) / m;
}

/// Sums of n consecutive entries of x with window starts every m entries.
/// Each sum accumulates left to right.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> windowed_sums(
    const Eigen::MatrixBase<Derived>& x, Eigen::Index n, Eigen::Index m) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index len = rrnim_length(x.size(), n, m);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(len);
  for (Eigen::Index i = 0; i < len; ++i) {
    Scalar acc = x(i * m);
    for (Eigen::Index j = 1; j < n; ++j) acc += x(i * m + j);
    y(i) = acc;
  }
  return y;
}

/// Builds RR_nI_m from a repaired interval series. The time axis is the
/// running sum of the new values when m == n, and the parent onset time of
/// each window's first interval when m < n.
RnimSeries build_rrnim(const IbiSeries& ibi, int n, int m);

enum class PlanMode { single, m_equals_n, all };

struct Plan {
  int n = 1;
  int m = 1;
  friend auto operator<=>(const Plan&, const Plan&) = default;
};

std::vector<Plan> enumerate_plans(PlanMode mode, int n, std::optional<int> m = std::nullopt);

}  // namespace hrnv
