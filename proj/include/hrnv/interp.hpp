#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "hrnv/error.hpp"

namespace hrnv {

namespace detail {

template <typename Scalar>
using Column = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Index k of the knot interval [x_k, x_{k+1}] used to evaluate at t. Values
// outside the knot range use the first or last interval.
template <typename Scalar>
Eigen::Index knot_interval(const Column<Scalar>& x, Scalar t) {
  const auto n = x.size();
  const Scalar* begin = x.data();
  const Scalar* it = std::upper_bound(begin, begin + n, t);
  Eigen::Index k = static_cast<Eigen::Index>(it - begin) - 1;
  return std::clamp<Eigen::Index>(k, 0, n - 2);
}

template <typename Scalar>
void check_knots(const Column<Scalar>& x, const Column<Scalar>& y) {
  if (x.size() != y.size()) throw Error(Errc::InvalidParameters, "knot/value size mismatch");
  if (x.size() < 2) throw Error(Errc::InvalidParameters, "interpolation needs at least two knots");
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw Error(Errc::InvalidParameters, "knots must be strictly increasing");
  }
}

}  // namespace detail

/// Piecewise-linear interpolant through (x, y).
template <typename Scalar>
class LinearInterpolant {
 public:
  using Vector = detail::Column<Scalar>;

  LinearInterpolant(Vector x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    detail::check_knots(x_, y_);
  }

  Scalar operator()(Scalar t) const {
    const auto k = detail::knot_interval(x_, t);
    const Scalar w = (t - x_[k]) / (x_[k + 1] - x_[k]);
    return y_[k] + w * (y_[k + 1] - y_[k]);
  }

  template <typename Derived>
  Vector operator()(const Eigen::MatrixBase<Derived>& t) const {
    return t.derived().unaryExpr([this](Scalar v) { return (*this)(v); });
  }

 private:
  Vector x_;
  Vector y_;
};

/// Natural cubic spline (zero second derivative at both end knots).
template <typename Scalar>
class CubicSpline {
 public:
  using Vector = detail::Column<Scalar>;

  CubicSpline(Vector x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    detail::check_knots(x_, y_);
    solve_second_derivatives();
  }

  Scalar operator()(Scalar t) const {
    const auto k = detail::knot_interval(x_, t);
    const Scalar h = x_[k + 1] - x_[k];
    const Scalar a = (x_[k + 1] - t) / h;
    const Scalar b = (t - x_[k]) / h;
    return a * y_[k] + b * y_[k + 1] +
           ((a * a * a - a) * m2_[k] + (b * b * b - b) * m2_[k + 1]) * (h * h) / Scalar(6);
  }

  template <typename Derived>
  Vector operator()(const Eigen::MatrixBase<Derived>& t) const {
    return t.derived().unaryExpr([this](Scalar v) { return (*this)(v); });
  }

 private:
  // Thomas algorithm on the tridiagonal system for interior knots.
  void solve_second_derivatives() {
    const auto n = x_.size();
    m2_ = Vector::Zero(n);
    if (n < 3) return;
    const auto interior = n - 2;
    Vector diag(interior), upper(interior), rhs(interior);
    for (Eigen::Index i = 1; i <= interior; ++i) {
      const Scalar h0 = x_[i] - x_[i - 1];
      const Scalar h1 = x_[i + 1] - x_[i];
      diag[i - 1] = Scalar(2) * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = Scalar(6) * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    // Lower diagonal entry for row r is h0 of row r, equal to upper[r - 1].
    for (Eigen::Index r = 1; r < interior; ++r) {
      const Scalar w = upper[r - 1] / diag[r - 1];
      diag[r] -= w * upper[r - 1];
      rhs[r] -= w * rhs[r - 1];
    }
    m2_[interior] = rhs[interior - 1] / diag[interior - 1];
    for (Eigen::Index r = interior - 2; r >= 0; --r) {
      m2_[r + 1] = (rhs[r] - upper[r] * m2_[r + 2]) / diag[r];
    }
  }

  Vector x_;
  Vector y_;
  Vector m2_;
};

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// slopes with the three-point end conditions).
template <typename Scalar>
class Pchip {
 public:
  using Vector = detail::Column<Scalar>;

  Pchip(Vector x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    detail::check_knots(x_, y_);
    compute_slopes();
  }

  Scalar operator()(Scalar t) const {
    const auto k = detail::knot_interval(x_, t);
    const Scalar h = x_[k + 1] - x_[k];
    const Scalar s = (t - x_[k]) / h;
    const Scalar s2 = s * s;
    const Scalar s3 = s2 * s;
    const Scalar h00 = Scalar(2) * s3 - Scalar(3) * s2 + Scalar(1);
    const Scalar h10 = s3 - Scalar(2) * s2 + s;
    const Scalar h01 = Scalar(-2) * s3 + Scalar(3) * s2;
    const Scalar h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
  }

  template <typename Derived>
  Vector operator()(const Eigen::MatrixBase<Derived>& t) const {
    return t.derived().unaryExpr([this](Scalar v) { return (*this)(v); });
  }

 private:
  static Scalar sign(Scalar v) { return v > 0 ? Scalar(1) : (v < 0 ? Scalar(-1) : Scalar(0)); }

  static Scalar end_slope(Scalar h0, Scalar h1, Scalar del0, Scalar del1) {
    Scalar d = ((Scalar(2) * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (sign(d) != sign(del0)) {
      d = 0;
    } else if (sign(del0) != sign(del1) && std::abs(d) > std::abs(Scalar(3) * del0)) {
      d = Scalar(3) * del0;
    }
    return d;
  }

  void compute_slopes() {
    const auto n = x_.size();
    Vector h = x_.tail(n - 1) - x_.head(n - 1);
    Vector del = (y_.tail(n - 1) - y_.head(n - 1)).cwiseQuotient(h);
    d_ = Vector::Zero(n);
    if (n == 2) {
      d_.setConstant(del[0]);
      return;
    }
    for (Eigen::Index k = 1; k < n - 1; ++k) {
      if (del[k - 1] * del[k] > 0) {
        const Scalar w1 = Scalar(2) * h[k] + h[k - 1];
        const Scalar w2 = h[k] + Scalar(2) * h[k - 1];
        d_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
      }
    }
    d_[0] = end_slope(h[0], h[1], del[0], del[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  }

  Vector x_;
  Vector y_;
  Vector d_;
};

}  // namespace hrnv
