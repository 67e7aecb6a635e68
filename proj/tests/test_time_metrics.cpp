#include <doctest.h>

#include <algorithm>
#include <random>

#include "hrnv/time_metrics.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace hrnv;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

}  // namespace

TEST_CASE("constant series") {
  const auto t = compute_time_metrics(Eigen::VectorXd::Constant(10, 800.0), 1);
  CHECK(*t.avg_rr_ms == 800);
  CHECK(*t.sdrr_ms == 0);
  CHECK(*t.rmssd_ms == 0);
  CHECK(*t.nn50x_count == 0);
  CHECK(*t.pnn50x_pct == 0);
  CHECK(*t.triangular_index == 1);
  CHECK(*t.avg_hr_bpm == 75);
  CHECK_FALSE(t.skewness);
  CHECK_FALSE(t.kurtosis);
}

TEST_CASE("hand-evaluated example") {
  const auto t = compute_time_metrics(vec({800, 810, 790, 805}), 1);
  CHECK(*t.avg_rr_ms == 801.25);
  CHECK(*t.rmssd_ms == doctest::Approx(std::sqrt((100.0 + 400.0 + 225.0) / 3.0)).epsilon(1e-12));
  CHECK(*t.rmssd_ms == doctest::Approx(15.546).epsilon(1e-4));
}

TEST_CASE("NN50x uses n times 50 ms") {
  const auto x = vec({1600, 1680, 1560, 1620, 1650});
  CHECK(*compute_time_metrics(x, 2).nn50x_count == 1);
  CHECK(*compute_time_metrics(x, 2).pnn50x_pct == 25);
  CHECK(*compute_time_metrics(x, 1).nn50x_count == 3);
}

TEST_CASE("agreement with direct definitions") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = testing::clean_rri(rng, 2 + static_cast<Eigen::Index>(rng() % 300), 800, 50);
    const std::vector<double> xs(x.data(), x.data() + x.size());
    const auto t = compute_time_metrics(x, 1);
    CHECK(*t.avg_rr_ms == doctest::Approx(oracle::mean(xs)).epsilon(1e-12));
    CHECK(*t.sdrr_ms == doctest::Approx(std::sqrt(oracle::sample_variance(xs))).epsilon(1e-9));
    CHECK(*t.rmssd_ms == doctest::Approx(oracle::rmssd(xs)).epsilon(1e-12));
    CHECK(*t.nn50x_count == oracle::nn50x(xs, 1));
    CHECK(*t.pnn50x_pct >= 0);
    CHECK(*t.pnn50x_pct <= 100);
    double ssd = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) ssd += (xs[i] - xs[i - 1]) * (xs[i] - xs[i - 1]);
    CHECK(*t.rmssd_ms * *t.rmssd_ms * static_cast<double>(xs.size() - 1) == doctest::Approx(ssd).epsilon(1e-9));
    std::vector<double> hr;
    for (double v : xs) hr.push_back(60000.0 / v);
    CHECK(*t.avg_hr_bpm == doctest::Approx(oracle::mean(hr)).epsilon(1e-12));
    CHECK(*t.sdhr_bpm == doctest::Approx(std::sqrt(oracle::sample_variance(hr))).epsilon(1e-9));
  }
}

TEST_CASE("moments and triangular index") {
  const auto x = vec({1, 2, 3, 10});
  const double m2 = (9 + 4 + 1 + 36) / 4.0;
  const double m3 = (-27 - 8 - 1 + 216) / 4.0;
  const double m4 = (81 + 16 + 1 + 1296) / 4.0;
  CHECK(standardized_moment(x, 3) == doctest::Approx(m3 / std::pow(m2, 1.5)));
  CHECK(standardized_moment(x, 4) == doctest::Approx(m4 / (m2 * m2)));

  // 800 and 801 share the bin [796.875, 804.6875); 805 starts the next one.
  CHECK(triangular_index(vec({800, 801, 805, 900}), kTriangularBinMs) == 2);
  CHECK(triangular_index(vec({800, 850, 900}), kTriangularBinMs) == 3);
}

TEST_CASE("scale equivariance and permutation invariance") {
  std::mt19937_64 rng(42);
  const auto x = testing::clean_rri(rng, 200, 800, 50);
  const auto base = compute_time_metrics(x, 1);
  const auto scaled = compute_time_metrics(Eigen::VectorXd(1.7 * x), 1);
  CHECK(*scaled.avg_rr_ms == doctest::Approx(1.7 * *base.avg_rr_ms));
  CHECK(*scaled.sdrr_ms == doctest::Approx(1.7 * *base.sdrr_ms));
  CHECK(*scaled.rmssd_ms == doctest::Approx(1.7 * *base.rmssd_ms));
  CHECK(*scaled.skewness == doctest::Approx(*base.skewness));
  CHECK(*scaled.kurtosis == doctest::Approx(*base.kurtosis));

  Eigen::VectorXd shuffled = x;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto perm = compute_time_metrics(shuffled, 1);
  CHECK(*perm.avg_rr_ms == doctest::Approx(*base.avg_rr_ms));
  CHECK(*perm.sdrr_ms == doctest::Approx(*base.sdrr_ms));
  CHECK(*perm.skewness == doctest::Approx(*base.skewness));
  CHECK(*perm.kurtosis == doctest::Approx(*base.kurtosis));
  CHECK(*perm.triangular_index == *base.triangular_index);
}

TEST_CASE("Gaussian kurtosis is near 3") {
  std::mt19937_64 rng(43);
  const Eigen::VectorXd x = testing::white_noise(rng, 200000, 30.0).array() + 800.0;
  const auto t = compute_time_metrics(x, 1);
  CHECK(*t.kurtosis == doctest::Approx(3.0).epsilon(0.03));
  CHECK(std::abs(*t.skewness) < 0.03);
}

TEST_CASE("short series") {
  const auto one = compute_time_metrics(vec({800}), 1);
  CHECK(*one.avg_rr_ms == 800);
  CHECK_FALSE(one.sdrr_ms);
  CHECK_FALSE(one.rmssd_ms);
  CHECK_FALSE(one.pnn50x_pct);
  CHECK_THROWS_AS(compute_time_metrics(Eigen::VectorXd(0), 1), Error);
}
