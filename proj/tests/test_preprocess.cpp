#include <doctest.h>

#include <random>

#include "hrnv/preprocess.hpp"
#include "support/synthetic.hpp"

using namespace hrnv;

namespace {

IbiSeries series(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return IbiSeries::from_intervals("r", x);
}

std::size_t flagged_count(const IbiSeries& s) {
  return static_cast<std::size_t>(std::count(s.flags.begin(), s.flags.end(), BeatFlag::non_sinus));
}

}  // namespace

TEST_CASE("median-of-five rule") {
  const auto f = flag_outliers(series({800, 800, 800, 1200, 800, 800}));
  CHECK(flagged_count(f) == 1);
  CHECK(f.flags[3] == BeatFlag::non_sinus);
  CHECK(f.stats.abnormal == 1);
  CHECK(f.stats.clean == 5);
  CHECK(f.stats.clean + f.stats.abnormal == f.stats.total);

  CHECK(flagged_count(flag_outliers(series({800, 804, 796, 800}))) == 0);
  for (double theta : {0.01, 0.2, 0.9}) {
    CHECK(flagged_count(flag_outliers(series({700, 700, 700, 700, 700}), {theta, RepairAction::remove})) == 0);
  }
}

TEST_CASE("flagging leaves values alone and is idempotent") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x = testing::clean_rri(rng, 200, 800, 60);
    for (int k = 0; k < 5; ++k) x(static_cast<Eigen::Index>(rng() % 200)) *= 1.6;
    const auto once = flag_outliers(IbiSeries::from_intervals("r", x));
    const auto twice = flag_outliers(once);
    CHECK(once.intervals_ms == x);
    CHECK(twice.flags == once.flags);
    CHECK(twice.stats.abnormal == once.stats.abnormal);
  }
}

TEST_CASE("flag_outliers rejects empty input and bad thresholds") {
  CHECK_THROWS_AS(flag_outliers(IbiSeries::from_intervals("r", Eigen::VectorXd(0))), Error);
  CHECK_THROWS_AS((PreprocessConfig{1.0, RepairAction::remove}.validate()), Error);
  CHECK_THROWS_AS((PreprocessConfig{0.0, RepairAction::remove}.validate()), Error);
}

TEST_CASE("repair without flags is the identity") {
  const auto s = flag_outliers(series({800, 810, 790, 805}));
  for (auto action : {RepairAction::remove, RepairAction::spline, RepairAction::pchip, RepairAction::linear}) {
    const auto r = repair(s, {0.2, action});
    CHECK(r.intervals_ms == s.intervals_ms);
    CHECK(r.onset_times_ms == s.onset_times_ms);
  }
}

TEST_CASE("linear repair interpolates over onset time") {
  const PreprocessConfig cfg{0.2, RepairAction::linear};
  const auto r = repair(flag_outliers(series({800, 800, 1200, 800, 800}), cfg), cfg);
  REQUIRE(r.size() == 5);
  CHECK(r.intervals_ms(2) == doctest::Approx(800.0));
  CHECK(r.flags[2] == BeatFlag::interpolated);
  CHECK(r.stats.abnormal == 1);
  CHECK(r.stats.clean_percent() == doctest::Approx(80.0));
}

TEST_CASE("spline and pchip repairs stay close on smooth data") {
  std::mt19937_64 rng(22);
  auto x = testing::smooth_rri(rng, 200);
  const double truth = x(100);
  x(100) *= 1.5;
  for (auto action : {RepairAction::spline, RepairAction::pchip}) {
    const PreprocessConfig cfg{0.2, action};
    const auto r = repair(flag_outliers(IbiSeries::from_intervals("r", x), cfg), cfg);
    CHECK(std::abs(r.intervals_ms(100) - truth) / truth < 0.02);
  }
}

TEST_CASE("removal drops flagged intervals and rebuilds onset times") {
  const PreprocessConfig cfg{0.2, RepairAction::remove};
  const auto r = repair(flag_outliers(series({800, 800, 1200, 800, 800}), cfg), cfg);
  REQUIRE(r.size() == 4);
  for (Eigen::Index i = 1; i < r.size(); ++i) CHECK(r.onset_times_ms(i) > r.onset_times_ms(i - 1));
  CHECK(r.onset_times_ms(3) == 3200.0);
}

TEST_CASE("edge outliers take the nearest clean value") {
  const PreprocessConfig cfg{0.2, RepairAction::spline};
  const auto r = repair(flag_outliers(series({1300, 800, 810, 790, 800, 805}), cfg), cfg);
  CHECK(r.intervals_ms(0) == 800.0);
}

TEST_CASE("repair fails when nothing is clean") {
  auto s = flag_outliers(series({800, 810}));
  for (auto& f : s.flags) f = BeatFlag::non_sinus;
  try {
    repair(s, {0.2, RepairAction::linear});
    FAIL("expected NothingClean");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NothingClean);
  }
}

TEST_CASE("repaired intervals stay positive") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x = testing::clean_rri(rng, 60, 800, 150);
    for (int k = 0; k < 8; ++k) x(static_cast<Eigen::Index>(rng() % 60)) = 200 + 3000.0 * (rng() % 2);
    for (auto action : {RepairAction::spline, RepairAction::pchip, RepairAction::linear}) {
      const PreprocessConfig cfg{0.2, action};
      const auto r = repair(flag_outliers(IbiSeries::from_intervals("r", x), cfg), cfg);
      CHECK(r.intervals_ms.minCoeff() > 0);
      CHECK(r.size() + static_cast<Eigen::Index>(r.stats.fallback_removed) == 60);
    }
  }
}
