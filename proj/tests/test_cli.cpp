#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "hrnv/io.hpp"
#include "hrnv/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace hrnv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("hrnv_cli_" + std::to_string(std::random_device{}()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
};

struct Run {
  int rc;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hrnv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {rc, out.str(), err.str()};
}

std::size_t data_rows(const std::string& csv) {
  return static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
}

void write_rri(const fs::path& path, std::mt19937_64& rng, Eigen::Index n) {
  const auto ms = testing::clean_rri(rng, n);
  std::ofstream f(path);
  for (Eigen::Index i = 0; i < ms.size(); ++i) f << format_number(ms(i) / 1000.0) << '\n';
}

testing::SyntheticEcg write_ecg(const fs::path& path, std::uint64_t seed, double duration_s) {
  std::mt19937_64 rng(seed);
  testing::SyntheticEcgOptions opt;
  opt.duration_s = duration_s;
  opt.baseline_wander_mv = 0.4;
  auto ecg = testing::synthetic_ecg(rng, opt);
  std::ofstream f(path);
  for (double v : ecg.record.samples) f << v << '\n';
  return ecg;
}

}  // namespace

TEST_CASE("demo workflow on the second half of an ECG") {
  TempDir dir;
  const auto input = dir.path / "demo.txt";
  write_ecg(input, 1, 600.0);
  const auto r = run({"analyze", "--input", input.string(), "--type", "ecg", "--fs", "128", "--segment",
                      "38400:76800", "--baseline-remove", "--mode", "single", "--n", "1", "--m", "1"});
  CHECK(r.rc == cli::kSuccess);
  CHECK(r.err.empty());
  const auto reports = parse_report(r.out);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].record_id == "demo.txt");
  CHECK(reports[0].n == 1);
  CHECK(reports[0].m == 1);
  REQUIRE(reports[0].time.avg_hr_bpm.has_value());
  CHECK(*reports[0].time.avg_hr_bpm == doctest::Approx(70.0).epsilon(0.1));
  CHECK(reports[0].beats.beat_count.has_value());
}

TEST_CASE("batch over three files with mode all") {
  TempDir dir;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 3; ++i) write_rri(dir.path / ("sub" + std::to_string(i) + "_rri.txt"), rng, 300);
  const auto out = dir.path / "report.csv";
  const auto r = run({"batch", "--input", dir.path.string(), "--mode", "all", "--n", "2", "--prefix", "sub",
                      "--postfix", "_rri.txt", "--out", out.string(), "--jobs", "2"});
  CHECK(r.rc == cli::kSuccess);
  CHECK(r.out.empty());
  const auto text = read_text_file(out);
  CHECK(data_rows(text) == 9);
  const auto reports = parse_report(text);
  REQUIRE(reports.size() == 9);
  CHECK(reports[0].record_id == "0");
  CHECK(reports[8].record_id == "2");
  CHECK(text.find("hr2v2_rmssd_ms") != std::string::npos);
}

TEST_CASE("batch from a list file with one corrupt input") {
  TempDir dir;
  std::mt19937_64 rng(4);
  write_rri(dir.path / "a.txt", rng, 200);
  write_text_file(dir.path / "b.txt", "0.8\nnot-a-number\n");
  write_text_file(dir.path / "list.txt", (dir.path / "a.txt").string() + "\n" + (dir.path / "b.txt").string() + "\n");
  const auto lenient = run({"batch", "--list", (dir.path / "list.txt").string()});
  CHECK(lenient.rc == cli::kSuccess);
  CHECK(data_rows(lenient.out) == 2);
  CHECK(lenient.out.find("MalformedNumeric") != std::string::npos);
  CHECK(lenient.err.find("b.txt") != std::string::npos);
  const auto strict = run({"batch", "--list", (dir.path / "list.txt").string(), "--strict"});
  CHECK(strict.rc == cli::kRecordFailure);
  CHECK(data_rows(strict.out) == 2);
}

TEST_CASE("batch rejects ECG unless unattended") {
  TempDir dir;
  write_ecg(dir.path / "e.txt", 3, 60.0);
  const auto plain = run({"batch", "--input", (dir.path / "e.txt").string(), "--type", "ecg", "--fs", "128"});
  CHECK(plain.out.find("BatchTypeViolation") != std::string::npos);
  const auto unattended = run(
      {"batch", "--input", (dir.path / "e.txt").string(), "--type", "ecg", "--fs", "128", "--unattended-ecg"});
  CHECK(unattended.rc == cli::kSuccess);
  CHECK(unattended.out.find("BatchTypeViolation") == std::string::npos);
  CHECK(parse_report(unattended.out).size() == 1);
}

TEST_CASE("usage errors exit with status 2") {
  TempDir dir;
  std::mt19937_64 rng(6);
  write_rri(dir.path / "x.txt", rng, 50);
  const auto x = (dir.path / "x.txt").string();

  const auto no_fs = run({"analyze", "--input", x, "--type", "ecg"});
  CHECK(no_fs.rc == cli::kUsageError);
  CHECK(no_fs.err.find("--fs") != std::string::npos);
  CHECK(run({"analyze", "--input", x, "--psd", "magic"}).rc == cli::kUsageError);
  CHECK(run({"analyze", "--input", x, "--n", "2", "--m", "3"}).rc == cli::kUsageError);
  CHECK(run({"analyze", "--input", x, "--n", "0"}).rc == cli::kUsageError);
  CHECK(run({"analyze", "--input", x, "--lf", "0.15:0.04"}).rc == cli::kUsageError);
  CHECK(run({"analyze", "--input", x, "--lf", "low"}).rc == cli::kUsageError);
  CHECK(run({"analyze", "--input", x, "--segment", "5:1"}).rc == cli::kUsageError);
  CHECK(run({"analyze", "--input", x, "--threshold", "-1"}).rc == cli::kUsageError);
  CHECK(run({"analyze"}).rc == cli::kUsageError);
  CHECK(run({}).rc == cli::kUsageError);
  CHECK(run({"frobnicate"}).rc == cli::kUsageError);
}

TEST_CASE("help lists every setting with its default") {
  const auto r = run({"analyze", "--help"});
  CHECK(r.rc == cli::kSuccess);
  for (const char* flag : {"--type", "--fs", "--segment", "--baseline-remove", "--snap", "--threshold", "--action",
                           "--mode", "--n", "--m", "--psd", "--vlf", "--lf", "--hf", "--prefix", "--postfix"}) {
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
  }
  for (const char* def : {"0.2", "remove", "single", "lomb", "0.04:0.15", "0.15:0.4", "auto"}) {
    CHECK_MESSAGE(r.out.find(def) != std::string::npos, def);
  }
  CHECK(run({"--help"}).rc == cli::kSuccess);
}

TEST_CASE("a failed single record is reported") {
  TempDir dir;
  write_text_file(dir.path / "bad.txt", "0.8\n-0.1\n");
  const auto lenient = run({"analyze", "--input", (dir.path / "bad.txt").string()});
  CHECK(lenient.rc == cli::kSuccess);
  CHECK(lenient.err.find("bad.txt") != std::string::npos);
  const auto strict = run({"analyze", "--input", (dir.path / "bad.txt").string(), "--strict"});
  CHECK(strict.rc == cli::kRecordFailure);
}

TEST_CASE("detect writes a peaks file and compare measures it") {
  TempDir dir;
  const auto ecg = write_ecg(dir.path / "rec.txt", 8, 120.0);
  const auto peaks_a = dir.path / "a.peaks";
  const auto r = run({"detect", "--input", (dir.path / "rec.txt").string(), "--fs", "128", "--out", peaks_a.string()});
  REQUIRE(r.rc == cli::kSuccess);
  const auto a = read_peaks(peaks_a);
  CHECK(a.record_id == "rec.txt");
  CHECK(a.fs == 128.0);
  const auto score = testing::score_detections(ecg.r_peaks, a.peaks, 128.0);
  CHECK(score.sensitivity() > 0.99);

  CHECK(run({"detect", "--input", (dir.path / "rec.txt").string()}).rc == cli::kUsageError);

  auto shifted = a;
  for (auto& p : shifted.peaks) p += 1;
  write_peaks(dir.path / "b.peaks", shifted);
  const auto same = run({"compare", peaks_a.string(), peaks_a.string()});
  CHECK(same.rc == cli::kSuccess);
  CHECK(same.out == "d_l1,0\n");
  const auto off = run({"compare", peaks_a.string(), (dir.path / "b.peaks").string()});
  CHECK(off.out == "d_l1," + std::to_string(a.peaks.size()) + "\n");

  shifted.peaks.pop_back();
  write_peaks(dir.path / "c.peaks", shifted);
  const auto mismatch = run({"compare", peaks_a.string(), (dir.path / "c.peaks").string()});
  CHECK(mismatch.rc == cli::kRecordFailure);
  CHECK(mismatch.err.find("CountMismatch") != std::string::npos);

  const auto from_peaks = run({"analyze", "--input", peaks_a.string(), "--type", "peaks"});
  CHECK(from_peaks.rc == cli::kSuccess);
  CHECK(parse_report(from_peaks.out).size() == 1);
}

TEST_CASE("compare report tables") {
  TempDir dir;
  std::mt19937_64 rng(10);
  write_rri(dir.path / "r.txt", rng, 300);
  const auto ref = dir.path / "ref.csv";
  REQUIRE(run({"analyze", "--input", (dir.path / "r.txt").string(), "--out", ref.string()}).rc == cli::kSuccess);
  const auto r = run({"compare", ref.string(), ref.string()});
  CHECK(r.rc == cli::kSuccess);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "record_id,n,m,metric,epsilon,status_agrees");
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(line.ends_with(",true"));
    CHECK((line.find(",0,true") != std::string::npos || line.find(",NA,true") != std::string::npos));
  }
  CHECK(count > 20);

  const auto other = dir.path / "other.csv";
  REQUIRE(run({"analyze", "--input", (dir.path / "r.txt").string(), "--n", "2", "--out", other.string()}).rc ==
          cli::kSuccess);
  const auto mismatch = run({"compare", other.string(), ref.string()});
  CHECK(mismatch.rc == cli::kRecordFailure);
  CHECK(mismatch.err.find("PlanMismatch") != std::string::npos);
}
