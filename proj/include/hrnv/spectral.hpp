#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "hrnv/core.hpp"

namespace hrnv {

enum class PsdMethod { lomb, welch, fft, burg };

std::string_view to_string(PsdMethod method) noexcept;
std::optional<PsdMethod> parse_psd_method(std::string_view name) noexcept;

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

struct FreqConfig {
  PsdMethod method = PsdMethod::lomb;
  Band vlf{0.0, 0.04};
  Band lf{0.04, 0.15};
  Band hf{0.15, 0.4};
  /// Even-grid rate for welch, fft and burg.
  double resample_hz = 4.0;
  int burg_order = 16;
  /// Lomb grid oversampling: df = 1 / (oversample * T).
  double oversample = 4.0;

  void validate() const;
};

/// One-sided PSD in ms^2/Hz on an ascending grid that excludes DC.
struct PsdEstimate {
  Eigen::VectorXd freqs_hz;
  Eigen::VectorXd power;
  PsdMethod method = PsdMethod::lomb;
};

/// Evenly resampled, mean-removed tachogram.
struct EvenTachogram {
  Eigen::VectorXd samples_ms;
  double rate_hz = 4.0;
  double start_s = 0.0;
};

/// Raw Lomb-Scargle periodogram of y sampled at times t (seconds), with the
/// time-offset tau that makes the sine and cosine terms orthogonal. y is
/// expected to be mean-centered.
template <typename DerivedT, typename DerivedY, typename DerivedF>
Eigen::Matrix<typename DerivedY::Scalar, Eigen::Dynamic, 1> lomb_scargle(
    const Eigen::MatrixBase<DerivedT>& t, const Eigen::MatrixBase<DerivedY>& y,
    const Eigen::MatrixBase<DerivedF>& freqs) {
  using Scalar = typename DerivedY::Scalar;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> power(freqs.size());
  for (Eigen::Index k = 0; k < freqs.size(); ++k) {
    const Scalar w = two_pi * freqs(k);
    const auto phase = (Scalar(2) * w * t.array()).eval();
    const Scalar tau = std::atan2(phase.sin().sum(), phase.cos().sum()) / (Scalar(2) * w);
    const auto arg = (w * (t.array() - tau)).eval();
    const auto c = arg.cos().eval();
    const auto s = arg.sin().eval();
    const Scalar cc = c.square().sum();
    const Scalar ss = s.square().sum();
    const Scalar yc = (y.array() * c).sum();
    const Scalar ys = (y.array() * s).sum();
    Scalar p = 0;
    if (cc > 0) p += yc * yc / cc;
    if (ss > 0) p += ys * ys / ss;
    power(k) = p / Scalar(2);
  }
  return power;
}

/// Autoregressive model fitted by the Burg recursion: x[n] + sum_k a_k x[n-k] = e[n].
template <typename Scalar>
struct ArModel {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeffs;  // a_1 .. a_p
  Scalar noise_variance = 0;
};

template <typename Derived>
ArModel<typename Derived::Scalar> burg_ar(const Eigen::MatrixBase<Derived>& x, Eigen::Index order) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = x.size();
  Vec fwd = x;
  Vec bwd = x;
  Vec a = Vec::Zero(order + 1);
  a(0) = 1;
  Scalar error = x.squaredNorm() / static_cast<Scalar>(n);
  for (Eigen::Index m = 1; m <= order; ++m) {
    Scalar num = 0;
    Scalar den = 0;
    for (Eigen::Index i = m; i < n; ++i) {
      num += fwd(i) * bwd(i - 1);
      den += fwd(i) * fwd(i) + bwd(i - 1) * bwd(i - 1);
    }
    const Scalar k = den > 0 ? Scalar(-2) * num / den : Scalar(0);
    const Vec prev = a;
    for (Eigen::Index i = 1; i <= m; ++i) a(i) = prev(i) + k * prev(m - i);
    for (Eigen::Index i = n - 1; i >= m; --i) {
      const Scalar f = fwd(i) + k * bwd(i - 1);
      bwd(i) = bwd(i - 1) + k * fwd(i);
      fwd(i) = f;
    }
    error *= (Scalar(1) - k * k);
  }
  return {a.tail(order), error};
}

/// Spectrum of an AR model at `freqs` for sampling rate fs, up to scale.
template <typename Scalar, typename DerivedF>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ar_spectrum(const ArModel<Scalar>& model,
                                                     const Eigen::MatrixBase<DerivedF>& freqs, Scalar fs) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(freqs.size());
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  for (Eigen::Index k = 0; k < freqs.size(); ++k) {
    const Scalar w = two_pi * freqs(k) / fs;
    Scalar re = 1;
    Scalar im = 0;
    for (Eigen::Index j = 0; j < model.coeffs.size(); ++j) {
      re += model.coeffs(j) * std::cos(w * Scalar(j + 1));
      im -= model.coeffs(j) * std::sin(w * Scalar(j + 1));
    }
    out(k) = model.noise_variance / fs / (re * re + im * im);
  }
  return out;
}

/// Lomb-Scargle PSD of the series on f_k = k / (oversample * T) up to the HF
/// upper edge, rescaled so that sum(power) * df equals the sample variance.
PsdEstimate lomb_psd(const RnimSeries& series, const FreqConfig& cfg = {});
PsdEstimate lomb_psd(const Eigen::VectorXd& times_s, const Eigen::VectorXd& values_ms,
                     const FreqConfig& cfg = {});

/// Natural cubic spline of (time, value) sampled at rate_hz over
/// [first, last] onset time, mean removed.
EvenTachogram resample_even(const RnimSeries& series, double rate_hz);

/// Hamming-windowed segments of min(256, N) samples with 50% overlap,
/// rescaled to the sample variance.
PsdEstimate welch_psd(const EvenTachogram& tachogram, const FreqConfig& cfg = {});
/// One-sided periodogram 2|X_k|^2 / (fs N); Parseval makes sum(power) * df
/// the biased variance without further rescaling.
PsdEstimate fft_psd(const EvenTachogram& tachogram, const FreqConfig& cfg = {});
/// AR(burg_order) spectrum on the periodogram grid, rescaled to the sample variance.
PsdEstimate burg_psd(const EvenTachogram& tachogram, const FreqConfig& cfg = {});

/// Dispatches on cfg.method.
PsdEstimate estimate_psd(const RnimSeries& series, const FreqConfig& cfg);

/// Exact integral over [lo, hi] of the piecewise-linear PSD, held constant
/// beyond the first and last grid points.
double integrate_psd(const PsdEstimate& psd, double lo, double hi);

struct FreqMetrics {
  PsdMethod method = PsdMethod::lomb;
  Band vlf, lf, hf;
  std::optional<double> vlf_peak_hz, lf_peak_hz, hf_peak_hz;
  std::optional<double> vlf_power_ms2, lf_power_ms2, hf_power_ms2;
  std::optional<double> vlf_pct, lf_pct, hf_pct;
  std::optional<double> lf_nu, hf_nu;
  std::optional<double> total_power_ms2;
  std::optional<double> lf_hf_ratio;
};

FreqMetrics band_metrics(const PsdEstimate& psd, const FreqConfig& cfg = {});

}  // namespace hrnv
