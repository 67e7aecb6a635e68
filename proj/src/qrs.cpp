#include "hrnv/qrs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace hrnv {

namespace {

Eigen::Index odd_window(double seconds, double fs) {
  auto w = static_cast<Eigen::Index>(std::lround(seconds * fs));
  return std::max<Eigen::Index>(1, w | 1);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double median_of(const Eigen::VectorXd& x) {
  return median_of(std::vector<double>(x.data(), x.data() + x.size()));
}

// Symmetric centered convolution; the input is reflect-padded by the kernel
// length (clamped to what the signal can mirror).
Eigen::VectorXd convolve_centered(const Eigen::VectorXd& x, const Eigen::VectorXd& taps) {
  const Eigen::Index n = x.size();
  const Eigen::Index half = taps.size() / 2;
  const Eigen::Index pad = std::min<Eigen::Index>(taps.size(), n - 1);
  Eigen::VectorXd padded(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    padded[pad - 1 - i] = x[i + 1];
    padded[pad + n + i] = x[n - 2 - i];
  }
  padded.segment(pad, n) = x;

  Eigen::VectorXd y(n);
  const Eigen::Index total = padded.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index center = i + pad;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < taps.size(); ++k) {
      const Eigen::Index j = center + half - k;
      if (j >= 0 && j < total) acc += taps[k] * padded[j];
    }
    y[i] = acc;
  }
  return y;
}

Eigen::VectorXd bandpass_taps(double fs, double low_hz, double high_hz) {
  const auto half = static_cast<Eigen::Index>(std::lround(2.0 * fs / low_hz));
  const Eigen::Index len = 2 * half + 1;
  const double fl = low_hz / fs;
  const double fh = high_hz / fs;
  auto sinc = [](double v) { return v == 0.0 ? 1.0 : std::sin(std::numbers::pi * v) / (std::numbers::pi * v); };
  Eigen::VectorXd taps(len);
  for (Eigen::Index k = 0; k < len; ++k) {
    const double t = static_cast<double>(k - half);
    const double ideal = 2.0 * fh * sinc(2.0 * fh * t) - 2.0 * fl * sinc(2.0 * fl * t);
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len - 1));
    taps[k] = ideal * window;
  }
  return taps;
}

Eigen::VectorXd centered_moving_average(const Eigen::VectorXd& x, Eigen::Index window) {
  const Eigen::Index n = x.size();
  const Eigen::Index half = window / 2;
  Eigen::VectorXd prefix(n + 1);
  prefix[0] = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index reach = std::min({half, i, n - 1 - i});
    const Eigen::Index lo = i - reach;
    const Eigen::Index hi = i + reach + 1;
    y[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return y;
}

SnapMode resolve_auto(const Eigen::VectorXd& x, std::span<const SampleIndex> peaks, Eigen::Index w) {
  if (peaks.empty()) return SnapMode::local_max;
  const double med = median_of(x);
  std::vector<double> amplitudes;
  amplitudes.reserve(peaks.size());
  const Eigen::Index n = x.size();
  for (auto p : peaks) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, p - w);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, p + w);
    Eigen::Index best = lo;
    for (Eigen::Index i = lo; i <= hi; ++i) {
      if (std::abs(x[i] - med) > std::abs(x[best] - med)) best = i;
    }
    amplitudes.push_back(x[best]);
  }
  return median_of(std::move(amplitudes)) >= med ? SnapMode::local_max : SnapMode::local_min;
}

std::vector<SampleIndex> snap_indices(const Eigen::VectorXd& x, const std::vector<SampleIndex>& peaks,
                                      SnapMode mode, Eigen::Index w) {
  if (mode == SnapMode::none || peaks.empty()) return peaks;
  if (mode == SnapMode::automatic) mode = resolve_auto(x, peaks, w);
  const Eigen::Index n = x.size();
  std::vector<SampleIndex> out(peaks.size());
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    const SampleIndex p = peaks[i];
    const Eigen::Index lo = std::max<Eigen::Index>(0, p - w);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, p + w);
    SampleIndex cand = p;
    if (lo <= hi) {
      Eigen::Index idx = 0;
      if (mode == SnapMode::local_max) {
        x.segment(lo, hi - lo + 1).maxCoeff(&idx);
      } else {
        x.segment(lo, hi - lo + 1).minCoeff(&idx);
      }
      cand = lo + idx;
    }
    const bool after_prev = i == 0 || cand > out[i - 1];
    const bool before_next = i + 1 == peaks.size() || cand < peaks[i + 1];
    out[i] = (after_prev && before_next) ? cand : p;
  }
  return out;
}

}  // namespace

void DetectorConfig::validate(double fs) const {
  if (!(bandpass_low_hz > 0.0 && bandpass_low_hz < bandpass_high_hz && bandpass_high_hz < fs / 2.0)) {
    throw Error(Errc::InvalidConfig, "band-pass corners must satisfy 0 < low < high < fs/2");
  }
  if (!(refractory_ms > 0.0)) throw Error(Errc::InvalidConfig, "refractory_ms must be positive");
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw Error(Errc::InvalidConfig, "threshold_fraction must lie in (0, 1)");
  }
  if (!(integration_window_ms > 0.0) || !(snap_window_ms > 0.0) || !(searchback_factor > 1.0) ||
      !(peak_decay_s > 0.0)) {
    throw Error(Errc::InvalidConfig, "window lengths, search-back factor and decay must be positive");
  }
}

Eigen::VectorXd moving_median(const Eigen::VectorXd& x, Eigen::Index window) {
  const Eigen::Index n = x.size();
  const Eigen::Index half = window / 2;
  Eigen::VectorXd y(n);
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(window));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index reach = std::min({half, i, n - 1 - i});
    const Eigen::Index lo = i - reach;
    const Eigen::Index hi = i + reach + 1;
    buf.assign(x.data() + lo, x.data() + hi);
    y[i] = median_of(buf);
  }
  return y;
}

EcgRecord remove_baseline(const EcgRecord& signal) {
  signal.validate();
  const auto range = signal.analysis_range();
  Eigen::VectorXd x = signal.samples.segment(range.start, range.length());
  Eigen::VectorXd baseline =
      moving_median(moving_median(x, odd_window(0.2, signal.fs)), odd_window(0.6, signal.fs));
  EcgRecord out = signal;
  out.samples.segment(range.start, range.length()) = x - baseline;
  return out;
}

Eigen::VectorXd bandpass_zero_phase(const Eigen::VectorXd& x, double fs, double low_hz, double high_hz) {
  if (x.size() < 2) return Eigen::VectorXd::Zero(x.size());
  const Eigen::VectorXd taps = bandpass_taps(fs, low_hz, high_hz);
  return convolve_centered(convolve_centered(x, taps), taps);
}

PeakAnnotations detect_r_peaks(const EcgRecord& signal, const DetectorConfig& cfg) {
  signal.validate();
  if (signal.fs < 60.0) {
    throw Error(Errc::SamplingRateTooLow, "need fs >= 60 Hz, got " + std::to_string(signal.fs));
  }
  const auto range = signal.analysis_range();
  if (static_cast<double>(range.length()) / signal.fs < 2.0) {
    throw Error(Errc::SegmentTooShort, "need at least 2 s of signal");
  }
  cfg.validate(signal.fs);

  PeakAnnotations out;
  out.record_id = signal.record_id;
  out.fs = signal.fs;
  out.segment = signal.segment;

  const double fs = signal.fs;
  const Eigen::VectorXd x = signal.samples.segment(range.start, range.length());
  const Eigen::Index n = x.size();
  const double reference = (x.array() - median_of(x)).abs().maxCoeff();
  if (reference == 0.0) return out;

  const Eigen::VectorXd filtered = bandpass_zero_phase(x, fs, cfg.bandpass_low_hz, cfg.bandpass_high_hz);
  const Eigen::VectorXd energy =
      centered_moving_average(filtered.array().square().matrix(),
                              odd_window(cfg.integration_window_ms / 1000.0, fs));
  if (energy.maxCoeff() <= 1e-10 * reference * reference) return out;

  std::vector<Eigen::Index> candidates;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (energy[i] > energy[i - 1] && energy[i] >= energy[i + 1]) candidates.push_back(i);
  }

  const auto refractory = static_cast<Eigen::Index>(std::lround(cfg.refractory_ms * fs / 1000.0));
  const double decay_per_sample = 1.0 / (cfg.peak_decay_s * fs);
  double level = energy.head(std::min<Eigen::Index>(n, static_cast<Eigen::Index>(2.0 * fs))).maxCoeff();
  Eigen::Index level_at = 0;
  auto level_now = [&](Eigen::Index i) {
    return level * std::exp(-static_cast<double>(i - level_at) * decay_per_sample);
  };
  auto raise_level = [&](Eigen::Index i) {
    level = std::max(level_now(i), energy[i]);
    level_at = i;
  };
  std::vector<Eigen::Index> accepted;
  auto median_rr = [&]() -> double {
    if (accepted.size() < 2) return 0.0;
    std::vector<double> rr;
    const std::size_t first = accepted.size() > 9 ? accepted.size() - 9 : 0;
    for (std::size_t k = first + 1; k < accepted.size(); ++k) {
      rr.push_back(static_cast<double>(accepted[k] - accepted[k - 1]));
    }
    return median_of(std::move(rr));
  };

  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const Eigen::Index c = candidates[ci];
    const double threshold = cfg.threshold_fraction * level_now(c);
    if (energy[c] < threshold) continue;
    if (!accepted.empty() && c - accepted.back() < refractory) {
      if (energy[c] > energy[accepted.back()]) {
        accepted.back() = c;
        raise_level(c);
      }
      continue;
    }
    if (!accepted.empty()) {
      const double rr = median_rr();
      const Eigen::Index last = accepted.back();
      if (rr > 0.0 && static_cast<double>(c - last) > cfg.searchback_factor * rr) {
        Eigen::Index best = -1;
        for (std::size_t cj = 0; cj < ci; ++cj) {
          const Eigen::Index j = candidates[cj];
          if (j < last + refractory || j > c - refractory) continue;
          if (energy[j] >= 0.5 * threshold && (best < 0 || energy[j] > energy[best])) best = j;
        }
        if (best >= 0) accepted.push_back(best);
      }
    }
    accepted.push_back(c);
    raise_level(c);
  }

  // Locate the QRS apex in the filtered signal near each energy peak.
  const auto apex_window = static_cast<Eigen::Index>(std::lround(0.075 * fs));
  std::vector<SampleIndex> local;
  local.reserve(accepted.size());
  for (auto c : accepted) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, c - apex_window);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, c + apex_window);
    Eigen::Index idx = 0;
    filtered.segment(lo, hi - lo + 1).cwiseAbs().maxCoeff(&idx);
    const SampleIndex p = lo + idx;
    if (local.empty() || p > local.back()) local.push_back(p);
  }

  const auto snap_w = static_cast<Eigen::Index>(std::lround(cfg.snap_window_ms * fs / 1000.0));
  local = snap_indices(x, local, cfg.snap_mode, snap_w);

  // Snapping can pull two neighbours inside the refractory period; keep the
  // larger excursion.
  const double med = median_of(x);
  std::vector<SampleIndex> cleaned;
  for (auto p : local) {
    if (!cleaned.empty() && p - cleaned.back() < refractory) {
      if (std::abs(x[p] - med) > std::abs(x[cleaned.back()] - med)) cleaned.back() = p;
      continue;
    }
    cleaned.push_back(p);
  }

  out.peaks.reserve(cleaned.size());
  for (auto p : cleaned) out.peaks.push_back(p + range.start);
  return out;
}

PeakAnnotations snap_peaks(const EcgRecord& signal, const PeakAnnotations& peaks, SnapMode mode,
                           double window_ms) {
  if (!(window_ms > 0.0)) throw Error(Errc::InvalidParameters, "window_ms must be positive");
  const double fs = signal.fs > 0.0 ? signal.fs : peaks.fs;
  const auto w = static_cast<Eigen::Index>(std::lround(window_ms * fs / 1000.0));
  PeakAnnotations out = peaks;
  out.peaks = snap_indices(signal.samples, peaks.peaks, mode, w);
  return out;
}

PeakAnnotations apply_peak_edits(const PeakAnnotations& peaks, std::span<const SampleIndex> add,
                                 std::span<const SampleIndex> remove, SampleIndex sample_count) {
  std::set<SampleIndex> current(peaks.peaks.begin(), peaks.peaks.end());
  for (auto r : remove) {
    if (current.erase(r) == 0) throw Error(Errc::UnknownPeak, "no peak at sample " + std::to_string(r));
  }
  for (auto a : add) {
    if (a < 0 || a >= sample_count) {
      throw Error(Errc::OutOfRange, "sample " + std::to_string(a) + " outside 0:" + std::to_string(sample_count));
    }
    if (!current.insert(a).second) {
      throw Error(Errc::DuplicatePeak, "peak already present at sample " + std::to_string(a));
    }
  }
  PeakAnnotations out = peaks;
  out.peaks.assign(current.begin(), current.end());
  out.version = peaks.version + 1;
  return out;
}

}  // namespace hrnv
