#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "hrnv/core.hpp"

namespace hrnv {

enum class SnapMode { none, local_max, local_min, automatic };

/// Energy-detector settings. Defaults target adult surface ECG.
struct DetectorConfig {
  double bandpass_low_hz = 5.0;
  double bandpass_high_hz = 25.0;
  double integration_window_ms = 150.0;
  double refractory_ms = 250.0;
  double threshold_fraction = 0.3;
  double searchback_factor = 1.5;
  double snap_window_ms = 50.0;
  SnapMode snap_mode = SnapMode::automatic;
  /// Time constant of the exponentially decaying running peak.
  double peak_decay_s = 2.0;

  /// Throws InvalidConfig when the band or thresholds are inconsistent with fs.
  void validate(double fs) const;
};

/// Subtracts a two-stage moving-median baseline (200 ms then 600 ms windows)
/// over the analysis range. Samples outside the segment are left untouched.
EcgRecord remove_baseline(const EcgRecord& signal);

/// Centered moving median. Near the edges the window shrinks symmetrically,
/// so monotone stretches pass through unchanged.
Eigen::VectorXd moving_median(const Eigen::VectorXd& x, Eigen::Index window);

/// Zero-phase band-pass (windowed-sinc FIR applied forward and backward with
/// reflect padding of one filter length).
Eigen::VectorXd bandpass_zero_phase(const Eigen::VectorXd& x, double fs, double low_hz,
                                    double high_hz);

/// Detects R peaks inside the record's analysis range. Returned indices are
/// absolute sample positions in the record.
PeakAnnotations detect_r_peaks(const EcgRecord& signal, const DetectorConfig& cfg = {});

/// Moves each peak to the extremum of the signal within +/- window_ms. A peak
/// whose snapped position would break strict ordering keeps its position.
PeakAnnotations snap_peaks(const EcgRecord& signal, const PeakAnnotations& peaks, SnapMode mode,
                           double window_ms);

/// Removes then adds peaks; bumps version by one. `sample_count` bounds the
/// valid index range [0, sample_count).
PeakAnnotations apply_peak_edits(const PeakAnnotations& peaks, std::span<const SampleIndex> add,
                                 std::span<const SampleIndex> remove, SampleIndex sample_count);

}  // namespace hrnv
