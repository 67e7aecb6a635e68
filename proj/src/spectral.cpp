#include "hrnv/spectral.hpp"

#include <algorithm>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "hrnv/interp.hpp"
#include "hrnv/time_metrics.hpp"

namespace hrnv {

std::string_view to_string(PsdMethod method) noexcept {
  switch (method) {
    case PsdMethod::lomb: return "lomb";
    case PsdMethod::welch: return "welch";
    case PsdMethod::fft: return "fft";
    case PsdMethod::burg: return "burg";
  }
  return "lomb";
}

std::optional<PsdMethod> parse_psd_method(std::string_view name) noexcept {
  if (name == "lomb") return PsdMethod::lomb;
  if (name == "welch") return PsdMethod::welch;
  if (name == "fft") return PsdMethod::fft;
  if (name == "burg") return PsdMethod::burg;
  return std::nullopt;
}

void FreqConfig::validate() const {
  if (!(vlf.lo >= 0.0 && vlf.lo < vlf.hi && vlf.hi <= lf.lo && lf.lo < lf.hi && lf.hi <= hf.lo &&
        hf.lo < hf.hi)) {
    throw Error(Errc::InvalidConfig, "bands must be ordered and non-overlapping");
  }
  if (!(resample_hz > 2.0 * hf.hi)) throw Error(Errc::InvalidConfig, "resample_hz must exceed 2 * hf.hi");
  if (burg_order < 1) throw Error(Errc::InvalidConfig, "burg_order must be positive");
  if (!(oversample > 0.0)) throw Error(Errc::InvalidConfig, "oversample must be positive");
}

namespace {

void rescale_to(PsdEstimate& psd, double variance) {
  if (psd.freqs_hz.size() == 0) return;
  const double df = psd.freqs_hz.size() > 1 ? psd.freqs_hz[1] - psd.freqs_hz[0] : psd.freqs_hz[0];
  const double integrated = psd.power.sum() * df;
  if (integrated > 0.0 && variance > 0.0) {
    psd.power *= variance / integrated;
  } else {
    psd.power.setZero();
  }
}

Eigen::VectorXd periodogram_grid(Eigen::Index length, double rate_hz) {
  const Eigen::Index bins = length / 2;
  return Eigen::VectorXd::LinSpaced(bins, 1.0, static_cast<double>(bins)) * (rate_hz / static_cast<double>(length));
}

// |X_k|^2 for k = 1 .. N/2.
Eigen::VectorXd squared_spectrum(const Eigen::VectorXd& x) {
  Eigen::FFT<double> fft;
  std::vector<double> in(x.data(), x.data() + x.size());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  const Eigen::Index bins = x.size() / 2;
  Eigen::VectorXd mag(bins);
  for (Eigen::Index k = 1; k <= bins; ++k) mag[k - 1] = std::norm(out[static_cast<std::size_t>(k)]);
  return mag;
}

// One-sided doubling, except for the Nyquist bin of an even-length transform.
void fold_one_sided(Eigen::VectorXd& power, Eigen::Index length) {
  power *= 2.0;
  if (length % 2 == 0 && power.size() > 0) power[power.size() - 1] /= 2.0;
}

}  // namespace

PsdEstimate lomb_psd(const Eigen::VectorXd& times_s, const Eigen::VectorXd& values_ms, const FreqConfig& cfg) {
  cfg.validate();
  if (values_ms.size() < 4) throw Error(Errc::TooFewIntervals, "lomb needs at least 4 intervals");
  const Eigen::Index n = values_ms.size();
  const double duration = times_s[n - 1] - times_s[0];
  if (!(duration > 0.0)) throw Error(Errc::TooFewIntervals, "series spans no time");
  const double df = 1.0 / (cfg.oversample * duration);
  const auto bins = static_cast<Eigen::Index>(std::ceil(cfg.hf.hi / df - 1e-9));

  PsdEstimate psd;
  psd.method = PsdMethod::lomb;
  psd.freqs_hz = Eigen::VectorXd::LinSpaced(bins, 1.0, static_cast<double>(bins)) * df;
  const Eigen::VectorXd centered = (values_ms.array() - mean(values_ms)).matrix();
  const Eigen::VectorXd t = (times_s.array() - times_s[0]).matrix();
  psd.power = lomb_scargle(t, centered, psd.freqs_hz);
  rescale_to(psd, sample_variance(values_ms));
  return psd;
}

PsdEstimate lomb_psd(const RnimSeries& series, const FreqConfig& cfg) {
  return lomb_psd((series.times_ms / 1000.0).eval(), series.values_ms, cfg);
}

EvenTachogram resample_even(const RnimSeries& series, double rate_hz) {
  if (series.size() < 4) throw Error(Errc::TooFewIntervals, "resampling needs at least 4 intervals");
  if (!(rate_hz > 0.0)) throw Error(Errc::InvalidConfig, "rate_hz must be positive");
  const Eigen::VectorXd t = series.times_ms / 1000.0;
  const CubicSpline<double> spline(t, series.values_ms);
  const double span = t[t.size() - 1] - t[0];
  const auto count = static_cast<Eigen::Index>(std::floor(span * rate_hz + 1e-9)) + 1;
  Eigen::VectorXd grid(count);
  for (Eigen::Index k = 0; k < count; ++k) grid[k] = t[0] + static_cast<double>(k) / rate_hz;
  EvenTachogram out;
  out.rate_hz = rate_hz;
  out.start_s = t[0];
  out.samples_ms = spline(grid);
  out.samples_ms.array() -= mean(out.samples_ms);
  return out;
}

PsdEstimate fft_psd(const EvenTachogram& tachogram, const FreqConfig& cfg) {
  const Eigen::Index n = tachogram.samples_ms.size();
  if (n < 16) throw Error(Errc::TooShort, "fft needs at least 16 samples");
  (void)cfg;
  const Eigen::VectorXd x = (tachogram.samples_ms.array() - mean(tachogram.samples_ms)).matrix();
  PsdEstimate psd;
  psd.method = PsdMethod::fft;
  psd.freqs_hz = periodogram_grid(n, tachogram.rate_hz);
  psd.power = squared_spectrum(x) / (tachogram.rate_hz * static_cast<double>(n));
  fold_one_sided(psd.power, n);
  return psd;
}

PsdEstimate welch_psd(const EvenTachogram& tachogram, const FreqConfig& cfg) {
  (void)cfg;
  const Eigen::Index n = tachogram.samples_ms.size();
  if (n < 64) throw Error(Errc::TooShort, "welch needs at least 64 samples");
  const Eigen::Index len = std::min<Eigen::Index>(256, n);
  const Eigen::Index hop = len / 2;
  Eigen::VectorXd window(len);
  for (Eigen::Index i = 0; i < len; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len - 1));
  }
  const double window_power = window.squaredNorm();
  const Eigen::VectorXd x = (tachogram.samples_ms.array() - mean(tachogram.samples_ms)).matrix();

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(len / 2);
  Eigen::Index segments = 0;
  for (Eigen::Index start = 0; start + len <= n; start += hop) {
    acc += squared_spectrum(x.segment(start, len).cwiseProduct(window));
    ++segments;
  }
  PsdEstimate psd;
  psd.method = PsdMethod::welch;
  psd.freqs_hz = periodogram_grid(len, tachogram.rate_hz);
  psd.power = acc / (static_cast<double>(segments) * tachogram.rate_hz * window_power);
  fold_one_sided(psd.power, len);
  rescale_to(psd, sample_variance(x));
  return psd;
}

PsdEstimate burg_psd(const EvenTachogram& tachogram, const FreqConfig& cfg) {
  const Eigen::Index n = tachogram.samples_ms.size();
  if (n <= cfg.burg_order) {
    throw Error(Errc::BurgOrderTooHigh, "order " + std::to_string(cfg.burg_order) + " needs more than " +
                                            std::to_string(cfg.burg_order) + " samples");
  }
  const Eigen::VectorXd x = (tachogram.samples_ms.array() - mean(tachogram.samples_ms)).matrix();
  const auto model = burg_ar(x, cfg.burg_order);
  PsdEstimate psd;
  psd.method = PsdMethod::burg;
  psd.freqs_hz = periodogram_grid(n, tachogram.rate_hz);
  psd.power = ar_spectrum(model, psd.freqs_hz, tachogram.rate_hz);
  rescale_to(psd, sample_variance(x));
  return psd;
}

PsdEstimate estimate_psd(const RnimSeries& series, const FreqConfig& cfg) {
  cfg.validate();
  if (cfg.method == PsdMethod::lomb) return lomb_psd(series, cfg);
  const auto tachogram = resample_even(series, cfg.resample_hz);
  switch (cfg.method) {
    case PsdMethod::welch: return welch_psd(tachogram, cfg);
    case PsdMethod::fft: return fft_psd(tachogram, cfg);
    case PsdMethod::burg: return burg_psd(tachogram, cfg);
    case PsdMethod::lomb: break;
  }
  return lomb_psd(series, cfg);
}

double integrate_psd(const PsdEstimate& psd, double lo, double hi) {
  const auto& f = psd.freqs_hz;
  const auto& p = psd.power;
  const Eigen::Index n = f.size();
  if (n == 0 || !(hi > lo)) return 0.0;
  auto value_at = [&](double x) {
    if (x <= f[0]) return p[0];
    if (x >= f[n - 1]) return p[n - 1];
    const auto k = detail::knot_interval<double>(f, x);
    const double w = (x - f[k]) / (f[k + 1] - f[k]);
    return p[k] + w * (p[k + 1] - p[k]);
  };
  double total = 0.0;
  double prev_x = lo;
  double prev_v = value_at(lo);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (f[k] <= lo) continue;
    if (f[k] >= hi) break;
    total += 0.5 * (prev_v + p[k]) * (f[k] - prev_x);
    prev_x = f[k];
    prev_v = p[k];
  }
  total += 0.5 * (prev_v + value_at(hi)) * (hi - prev_x);
  return total;
}

FreqMetrics band_metrics(const PsdEstimate& psd, const FreqConfig& cfg) {
  cfg.validate();
  FreqMetrics out;
  out.method = psd.method;
  out.vlf = cfg.vlf;
  out.lf = cfg.lf;
  out.hf = cfg.hf;

  auto peak_in = [&](const Band& band, bool inclusive_hi) -> std::optional<double> {
    std::optional<double> best_f;
    double best_p = 0.0;
    for (Eigen::Index k = 0; k < psd.freqs_hz.size(); ++k) {
      const double f = psd.freqs_hz[k];
      const bool inside = f >= band.lo && (inclusive_hi ? f <= band.hi : f < band.hi);
      if (inside && (!best_f || psd.power[k] > best_p)) {
        best_f = f;
        best_p = psd.power[k];
      }
    }
    if (best_p <= 0.0) return std::nullopt;
    return best_f;
  };
  out.vlf_peak_hz = peak_in(cfg.vlf, false);
  out.lf_peak_hz = peak_in(cfg.lf, false);
  out.hf_peak_hz = peak_in(cfg.hf, true);

  const double vlf = integrate_psd(psd, cfg.vlf.lo, cfg.vlf.hi);
  const double lf = integrate_psd(psd, cfg.lf.lo, cfg.lf.hi);
  const double hf = integrate_psd(psd, cfg.hf.lo, cfg.hf.hi);
  const double total = integrate_psd(psd, cfg.vlf.lo, cfg.hf.hi);
  out.vlf_power_ms2 = vlf;
  out.lf_power_ms2 = lf;
  out.hf_power_ms2 = hf;
  out.total_power_ms2 = total;
  if (total > 0.0) {
    out.vlf_pct = vlf / total * 100.0;
    out.lf_pct = lf / total * 100.0;
    out.hf_pct = hf / total * 100.0;
  }
  if (lf + hf > 0.0) {
    out.lf_nu = lf / (lf + hf) * 100.0;
    out.hf_nu = hf / (lf + hf) * 100.0;
  }
  if (hf > 0.0) out.lf_hf_ratio = lf / hf;
  return out;
}

}  // namespace hrnv
