#include <doctest.h>

#include <random>

#include "hrnv/core.hpp"

using namespace hrnv;

namespace {

PeakAnnotations peaks_at(std::vector<SampleIndex> idx, double fs = 128.0) {
  PeakAnnotations p;
  p.record_id = "r";
  p.fs = fs;
  p.peaks = std::move(idx);
  return p;
}

}  // namespace

TEST_CASE("ibi_from_peaks converts index spacing to milliseconds") {
  const auto one_second = ibi_from_peaks(peaks_at({0, 128, 256}));
  REQUIRE(one_second.size() == 2);
  CHECK(one_second.intervals_ms(0) == 1000.0);
  CHECK(one_second.intervals_ms(1) == 1000.0);
  CHECK(one_second.onset_times_ms(1) == 2000.0);

  const auto mixed = ibi_from_peaks(peaks_at({0, 96, 224}));
  CHECK(mixed.intervals_ms(0) == 750.0);
  CHECK(mixed.intervals_ms(1) == 1000.0);
  CHECK(mixed.stats.total == 2);
  CHECK(mixed.stats.clean == 2);
  for (auto f : mixed.flags) CHECK(f == BeatFlag::clean);
}

TEST_CASE("ibi_from_peaks needs two peaks") {
  CHECK_THROWS_AS(ibi_from_peaks(peaks_at({0})), Error);
  try {
    ibi_from_peaks(peaks_at({}));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FewerThanTwoPeaks);
  }
}

TEST_CASE("onset times recover peak positions within one sample") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SampleIndex> idx{std::uniform_int_distribution<SampleIndex>(0, 500)(rng)};
    for (int k = 0; k < 300; ++k) idx.push_back(idx.back() + std::uniform_int_distribution<SampleIndex>(1, 400)(rng));
    const double fs = std::uniform_real_distribution<double>(100.0, 1000.0)(rng);
    const auto ibi = ibi_from_peaks(peaks_at(idx, fs));
    CHECK(ibi.size() == static_cast<Eigen::Index>(idx.size()) - 1);
    for (Eigen::Index i = 0; i < ibi.size(); ++i) {
      const double recovered = static_cast<double>(idx.front()) + ibi.onset_times_ms(i) * fs / 1000.0;
      CHECK(std::abs(recovered - static_cast<double>(idx[static_cast<std::size_t>(i) + 1])) <= 1.0);
    }
  }
}

TEST_CASE("extract_record_id strips matching affixes only") {
  CHECK(extract_record_id("Demo_NSR16786.txt", "Demo_", ".txt") == "NSR16786");
  CHECK(extract_record_id("a.csv", "", "") == "a.csv");
  CHECK(extract_record_id("a.csv", "x_", ".csv") == "a.csv");
  CHECK(extract_record_id(".txt", "", ".txt") == ".txt");
}

TEST_CASE("from_intervals rejects non-positive intervals") {
  Eigen::VectorXd x(3);
  x << 800, 0, 810;
  CHECK_THROWS_AS(IbiSeries::from_intervals("r", x), Error);
}

TEST_CASE("record validation") {
  EcgRecord rec{"r", 128.0, Eigen::VectorXd::Zero(100), SampleRange{10, 50}};
  CHECK_NOTHROW(rec.validate());
  CHECK(rec.analysis_range() == SampleRange{10, 50});
  rec.segment = SampleRange{50, 101};
  CHECK_THROWS_AS(rec.validate(), Error);
  rec.segment.reset();
  rec.fs = 0;
  CHECK_THROWS_AS(rec.validate(), Error);
}

TEST_CASE("errors carry their code name") {
  const Error e(Errc::CountMismatch, "300 vs 299");
  CHECK(std::string(e.what()).find("CountMismatch") != std::string::npos);
  CHECK(to_string(Errc::VersionConflict) == std::string_view("VersionConflict"));
}
