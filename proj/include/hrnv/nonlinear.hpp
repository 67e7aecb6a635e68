#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hrnv/core.hpp"
#include "hrnv/time_metrics.hpp"

namespace hrnv {

/// Entropy embedding dimension and tolerance factor (r = factor * SDRR). The
/// embedding is unrelated to the HRnV stride m.
struct EntropyConfig {
  int embedding = 2;
  double tolerance_factor = 0.15;

  void validate() const;
};

/// Box-size ranges for the two DFA exponents. The alpha2 upper bound is
/// further capped at floor(M / 4).
struct DfaConfig {
  int alpha1_min = 4;
  int alpha1_max = 16;
  int alpha2_min = 16;
  int alpha2_max = 64;
  Eigen::Index alpha1_min_length = 20;
  Eigen::Index alpha2_min_length = 64;
};

template <typename Scalar>
struct PoincareDescriptors {
  Scalar sd1 = 0;
  Scalar sd2 = 0;
};

/// SD1/SD2 of the lag-1 return map: sample standard deviations of
/// (x[i+1] - x[i]) / sqrt(2) and (x[i+1] + x[i]) / sqrt(2).
template <typename Derived>
PoincareDescriptors<typename Derived::Scalar> poincare(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  const Scalar root2 = std::sqrt(Scalar(2));
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> across = (x.tail(n - 1) - x.head(n - 1)) / root2;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> along = (x.tail(n - 1) + x.head(n - 1)) / root2;
  return {sample_std(across), sample_std(along)};
}

namespace detail {

// Whether the templates of length `len` starting at i and j lie within r
// under the max norm.
template <typename Derived>
bool templates_match(const Eigen::MatrixBase<Derived>& x, Eigen::Index i, Eigen::Index j, Eigen::Index len,
                     typename Derived::Scalar r) {
  for (Eigen::Index k = 0; k < len; ++k) {
    if (std::abs(x(i + k) - x(j + k)) > r) return false;
  }
  return true;
}

template <typename Scalar>
Scalar mean_log_fraction(const std::vector<Eigen::Index>& counts, Eigen::Index templates) {
  Scalar acc = 0;
  for (auto c : counts) acc += std::log(static_cast<Scalar>(c) / static_cast<Scalar>(templates));
  return acc / static_cast<Scalar>(templates);
}

}  // namespace detail

/// Approximate entropy with embedding `dim` and tolerance r (self-matches
/// counted). Requires x.size() > dim + 1.
template <typename Derived>
typename Derived::Scalar approximate_entropy(const Eigen::MatrixBase<Derived>& x, Eigen::Index dim,
                                             typename Derived::Scalar r) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  if (n <= dim + 1) throw Error(Errc::TooShort, "approximate entropy needs more than embedding + 1 points");
  const Eigen::Index short_count = n - dim + 1;
  const Eigen::Index long_count = n - dim;
  std::vector<Eigen::Index> c_short(static_cast<std::size_t>(short_count), 0);
  std::vector<Eigen::Index> c_long(static_cast<std::size_t>(long_count), 0);
  for (Eigen::Index i = 0; i < short_count; ++i) {
    for (Eigen::Index j = i; j < short_count; ++j) {
      if (!detail::templates_match(x, i, j, dim, r)) continue;
      c_short[static_cast<std::size_t>(i)] += 1;
      if (i != j) c_short[static_cast<std::size_t>(j)] += 1;
      if (j < long_count && std::abs(x(i + dim) - x(j + dim)) <= r) {
        c_long[static_cast<std::size_t>(i)] += 1;
        if (i != j) c_long[static_cast<std::size_t>(j)] += 1;
      }
    }
  }
  return detail::mean_log_fraction<Scalar>(c_short, short_count) -
         detail::mean_log_fraction<Scalar>(c_long, long_count);
}

/// Sample entropy -ln(A / B) over the first n - dim templates, self-matches
/// excluded. Empty when A or B is zero. Requires x.size() > dim + 1.
template <typename Derived>
std::optional<typename Derived::Scalar> sample_entropy(const Eigen::MatrixBase<Derived>& x, Eigen::Index dim,
                                                       typename Derived::Scalar r) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  if (n <= dim + 1) throw Error(Errc::TooShort, "sample entropy needs more than embedding + 1 points");
  const Eigen::Index templates = n - dim;
  long long b = 0;
  long long a = 0;
  for (Eigen::Index i = 0; i < templates; ++i) {
    for (Eigen::Index j = i + 1; j < templates; ++j) {
      if (!detail::templates_match(x, i, j, dim, r)) continue;
      ++b;
      if (std::abs(x(i + dim) - x(j + dim)) <= r) ++a;
    }
  }
  if (a == 0 || b == 0) return std::nullopt;
  return Scalar(0) - std::log(static_cast<Scalar>(a) / static_cast<Scalar>(b));
}

/// Cumulative sum of the mean-centered series.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> dfa_profile(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar mu = mean(x);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(x.size());
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc += x(i) - mu;
    y(i) = acc;
  }
  return y;
}

/// Root-mean-square residual of the profile after linear detrending in
/// floor(M / s) complete boxes counted from the left.
template <typename Derived>
typename Derived::Scalar dfa_fluctuation(const Eigen::MatrixBase<Derived>& profile, Eigen::Index box) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index boxes = profile.size() / box;
  const Scalar u_mean = static_cast<Scalar>(box - 1) / Scalar(2);
  const auto u = (Eigen::Array<Scalar, Eigen::Dynamic, 1>::LinSpaced(box, 0, static_cast<Scalar>(box - 1)) - u_mean).eval();
  const Scalar u_ss = u.square().sum();
  Scalar residual = 0;
  for (Eigen::Index b = 0; b < boxes; ++b) {
    const auto seg = profile.segment(b * box, box).array();
    const Scalar y_mean = seg.mean();
    const Scalar slope = (u * (seg - y_mean)).sum() / u_ss;
    residual += (seg - y_mean - slope * u).square().sum();
  }
  return std::sqrt(residual / static_cast<Scalar>(boxes * box));
}

/// Least-squares slope of log F(s) against log s for integer s in
/// [smin, smax]. Empty when fewer than two sizes fit or some F(s) is zero.
template <typename Derived>
std::optional<typename Derived::Scalar> dfa_exponent(const Eigen::MatrixBase<Derived>& x, Eigen::Index smin,
                                                     Eigen::Index smax) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (smax - smin < 1 || smin < 2 || x.size() / smax < 1) return std::nullopt;
  const Vec profile = dfa_profile(x);
  const Eigen::Index sizes = smax - smin + 1;
  Mat design(sizes, 2);
  Vec target(sizes);
  for (Eigen::Index k = 0; k < sizes; ++k) {
    const Eigen::Index s = smin + k;
    const Scalar f = dfa_fluctuation(profile, s);
    if (!(f > 0)) return std::nullopt;
    design(k, 0) = 1;
    design(k, 1) = std::log(static_cast<Scalar>(s));
    target(k) = std::log(f);
  }
  const Vec fit = design.colPivHouseholderQr().solve(target);
  return fit(1);
}

struct DfaExponents {
  std::optional<double> alpha1;
  std::optional<double> alpha2;
};

DfaExponents dfa(const Eigen::VectorXd& x, const DfaConfig& cfg = {});

struct NonlinearMetrics {
  std::optional<double> sd1_ms;
  std::optional<double> sd2_ms;
  std::optional<double> apen;
  std::optional<double> sampen;
  std::optional<double> dfa_alpha1;
  std::optional<double> dfa_alpha2;
};

/// Entropy tolerance r for a series: tolerance_factor * SDRR.
double entropy_tolerance(const Eigen::VectorXd& x, const EntropyConfig& cfg);

/// Each metric is gated on its own length requirement.
NonlinearMetrics compute_nonlinear(const Eigen::VectorXd& values_ms, const EntropyConfig& entropy = {},
                                   const DfaConfig& dfa_cfg = {});
NonlinearMetrics compute_nonlinear(const RnimSeries& series, const EntropyConfig& entropy = {},
                                   const DfaConfig& dfa_cfg = {});

}  // namespace hrnv
