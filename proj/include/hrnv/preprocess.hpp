#pragma once

#include "hrnv/core.hpp"

namespace hrnv {

enum class RepairAction { remove, spline, pchip, linear };

struct PreprocessConfig {
  /// Maximum fractional deviation from the local median.
  double threshold = 0.20;
  RepairAction action = RepairAction::remove;
  /// Width of the centered median window. Fixed.
  static constexpr int neighborhood = 5;

  void validate() const;
};

/// Flags interval i as non-sinus when |x_i - med_i| / med_i exceeds the
/// threshold, med_i being the median of the (edge-truncated) 5-interval
/// window centered on i. Values are unchanged; flags and stats are rebuilt.
IbiSeries flag_outliers(const IbiSeries& ibi, const PreprocessConfig& cfg = {});

/// Removes or interpolates the flagged intervals. Interpolation is over
/// onset time using only clean intervals; flagged points beyond the first or
/// last clean onset take the nearest clean value. Stats keep the pre-repair
/// counts.
IbiSeries repair(const IbiSeries& ibi, const PreprocessConfig& cfg = {});

}  // namespace hrnv
