#include <doctest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "hrnv/io.hpp"
#include "hrnv/review_server.hpp"
#include "support/synthetic.hpp"

#include <httplib.h>

using namespace hrnv;
using nlohmann::json;

namespace {

EcgRecord demo_ecg(std::uint64_t seed, double duration_s = 300.0) {
  std::mt19937_64 rng(seed);
  testing::SyntheticEcgOptions opt;
  opt.duration_s = duration_s;
  auto ecg = testing::synthetic_ecg(rng, opt);
  ecg.record.record_id = "demo";
  return std::move(ecg.record);
}

std::vector<SampleIndex> peaks_of(const json& body) { return body.at("peaks").get<std::vector<SampleIndex>>(); }

}  // namespace

TEST_CASE("min-max decimation keeps the extremes") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd x(38400);
  for (auto& v : x) v = noise(rng);
  x(12345) = 9.0;
  x(30001) = -9.0;

  const auto pts = decimate_min_max(x, {0, 38400}, 1000);
  CHECK(pts.size() <= 2000);
  CHECK(pts.size() >= 1000);
  const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                            [](const auto& a, const auto& b) { return a.second < b.second; });
  CHECK(hi->second == x.maxCoeff());
  CHECK(hi->first == 12345);
  CHECK(lo->second == x.minCoeff());
  CHECK(lo->first == 30001);
  CHECK(std::is_sorted(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; }));
  for (const auto& [i, v] : pts) CHECK(x(i) == v);

  for (SampleRange r : {SampleRange{100, 5000}, SampleRange{37000, 38400}, SampleRange{0, 1777}}) {
    const auto sub = decimate_min_max(x, r, 300);
    CHECK(sub.size() <= 600);
    double mx = -1e9, mn = 1e9;
    for (const auto& [i, v] : sub) {
      CHECK(r.contains(i));
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    CHECK(mx == x.segment(r.start, r.length()).maxCoeff());
    CHECK(mn == x.segment(r.start, r.length()).minCoeff());
  }

  const auto verbatim = decimate_min_max(x, {10, 510}, 1000);
  REQUIRE(verbatim.size() == 500);
  for (std::size_t k = 0; k < verbatim.size(); ++k) {
    CHECK(verbatim[k].first == static_cast<SampleIndex>(10 + k));
    CHECK(verbatim[k].second == x(static_cast<Eigen::Index>(10 + k)));
  }
}

TEST_CASE("signal endpoint") {
  ReviewService svc;
  const auto record = demo_ecg(2);
  const auto id = svc.add_ecg(record);
  const auto r = svc.signal(id, 0, 38400, 1000);
  REQUIRE(r.status == 200);
  CHECK(r.body["decimated"] == true);
  CHECK(r.body["index"].size() <= 2000);
  CHECK(r.body["index"].size() == r.body["value"].size());
  const auto values = r.body["value"].get<std::vector<double>>();
  CHECK(*std::max_element(values.begin(), values.end()) == record.samples.head(38400).maxCoeff());
  CHECK(*std::min_element(values.begin(), values.end()) == record.samples.head(38400).minCoeff());
  const auto small = svc.signal(id, 100, 200, std::nullopt);
  CHECK(small.body["decimated"] == false);
  CHECK(small.body["index"].size() == 100);
  CHECK(svc.signal(id, 200, 100, std::nullopt).status == 400);
  CHECK(svc.signal(id, 0, 1 << 30, std::nullopt).status == 400);
  CHECK(svc.signal("nope", std::nullopt, std::nullopt, std::nullopt).status == 404);
}

TEST_CASE("stale edits are rejected and leave peaks unchanged") {
  ReviewService svc;
  const auto id = svc.add_ecg(demo_ecg(3));
  const auto detected = svc.detect(id, json::object());
  REQUIRE(detected.status == 200);
  const auto v1 = detected.body["version"].get<std::uint64_t>();
  CHECK(v1 == 1);
  const auto before = peaks_of(detected.body);
  REQUIRE(before.size() > 100);

  const auto ok = svc.patch_peaks(id, {{"remove", {before[10]}}, {"expected_version", v1}});
  REQUIRE(ok.status == 200);
  CHECK(ok.body["version"] == v1 + 1);
  const auto after_ok = peaks_of(ok.body);

  const auto stale = svc.patch_peaks(id, {{"remove", {before[20]}}, {"expected_version", v1}});
  CHECK(stale.status == 409);
  CHECK(stale.body["error"] == "VersionConflict");
  CHECK(peaks_of(stale.body["current"]) == after_ok);
  CHECK(peaks_of(svc.peaks(id).body) == after_ok);
  CHECK(svc.peaks(id).body["version"] == v1 + 1);
}

TEST_CASE("accepted edits are serializable") {
  ReviewService svc;
  const auto record = demo_ecg(4);
  const auto len = static_cast<SampleIndex>(record.samples.size());
  const auto id = svc.add_ecg(record);
  auto local = PeakAnnotations{};
  {
    const auto d = svc.detect(id, json::object());
    local.record_id = d.body["record_id"];
    local.fs = d.body["fs"];
    local.version = d.body["version"];
    local.peaks = peaks_of(d.body);
  }
  std::mt19937_64 rng(99);
  for (int step = 0; step < 40; ++step) {
    std::vector<SampleIndex> add, remove;
    if (!local.peaks.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, local.peaks.size() - 1);
      remove.push_back(local.peaks[pick(rng)]);
    }
    std::uniform_int_distribution<SampleIndex> pos(0, len - 1);
    const auto candidate = pos(rng);
    if (!std::binary_search(local.peaks.begin(), local.peaks.end(), candidate)) add.push_back(candidate);
    const bool stale = step % 5 == 4;
    const auto expected = stale ? local.version - 1 : local.version;
    const auto r = svc.patch_peaks(id, {{"add", add}, {"remove", remove}, {"expected_version", expected}});
    if (stale) {
      CHECK(r.status == 409);
      continue;
    }
    REQUIRE(r.status == 200);
    local = apply_peak_edits(local, add, remove, len);
    CHECK(peaks_of(r.body) == local.peaks);
    CHECK(r.body["version"] == local.version);
  }
  CHECK(peaks_of(svc.peaks(id).body) == local.peaks);
}

TEST_CASE("concurrent edits with one expected version admit exactly one") {
  ReviewService svc;
  const auto id = svc.add_ecg(demo_ecg(5, 120.0));
  const auto v = svc.detect(id, json::object()).body["version"].get<std::uint64_t>();
  std::vector<int> status(8);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      status[t] = svc.patch_peaks(id, {{"add", {static_cast<SampleIndex>(5 + t)}}, {"expected_version", v}}).status;
    });
  }
  for (auto& th : threads) th.join();
  CHECK(std::count(status.begin(), status.end(), 200) == 1);
  CHECK(std::count(status.begin(), status.end(), 409) == 7);
  CHECK(svc.peaks(id).body["version"] == v + 1);
}

TEST_CASE("analysis follows edits and caching is transparent") {
  ReviewService svc;
  const auto id = svc.add_ecg(demo_ecg(6));
  const auto d = svc.detect(id, json::object());
  const auto peaks = peaks_of(d.body);
  const json cfg = {{"mode", "all"}, {"n", 2}};
  const auto first = svc.analyze(id, cfg);
  REQUIRE(first.status == 200);
  REQUIRE(first.body["reports"].size() == 3);
  CHECK(svc.analyze(id, cfg).body == first.body);

  ReviewService fresh;
  const auto id2 = fresh.add_ecg(demo_ecg(6));
  fresh.detect(id2, json::object());
  CHECK(fresh.analyze(id2, cfg).body == first.body);

  const auto edited = svc.patch_peaks(id, {{"remove", {peaks[peaks.size() / 2]}}, {"expected_version", d.body["version"]}});
  REQUIRE(edited.status == 200);
  const auto second = svc.analyze(id, cfg);
  REQUIRE(second.status == 200);
  CHECK(second.body["version"] == first.body["version"].get<int>() + 1);
  CHECK(second.body["reports"][0]["metrics"]["rmssd_ms"] != first.body["reports"][0]["metrics"]["rmssd_ms"]);
  CHECK(second.body["reports"][0]["metrics"]["beat_count"] != first.body["reports"][0]["metrics"]["beat_count"]);
}

TEST_CASE("validation and lookup errors") {
  ReviewService svc;
  const auto id = svc.add_ecg(demo_ecg(7, 60.0));
  CHECK(svc.peaks("missing").status == 404);
  CHECK(svc.peaks("missing").body["error"] == "NotFound");
  CHECK(svc.analyze("missing", json::object()).status == 404);

  const auto bad = svc.analyze(id, {{"n", "two"}, {"psd_method", "magic"}, {"outlier_threshold", -1}});
  CHECK(bad.status == 400);
  CHECK(bad.body["error"] == "ValidationError");
  CHECK(bad.body["fields"].contains("n"));
  CHECK(bad.body["fields"].contains("psd_method"));
  CHECK(bad.body["fields"].contains("outlier_threshold"));

  const auto no_version = svc.patch_peaks(id, {{"add", {1}}});
  CHECK(no_version.status == 400);
  CHECK(no_version.body["fields"].contains("expected_version"));
  CHECK(svc.patch_peaks(id, {{"add", {-5}}, {"expected_version", 0}}).status == 400);

  CHECK(svc.upload("", InputKind::rri, std::nullopt, RriUnit::seconds, "0.8\n").body["fields"].contains("name"));
  CHECK(svc.upload("x.txt", InputKind::ecg, std::nullopt, RriUnit::seconds, "1\n2\n").status == 400);
  CHECK(svc.upload("x.txt", InputKind::rri, std::nullopt, RriUnit::seconds, "0.8\nabc\n").status == 400);
}

TEST_CASE("interval records analyze without a waveform") {
  ReviewService svc;
  std::mt19937_64 rng(8);
  std::string text;
  const auto ms = testing::clean_rri(rng, 300);
  for (double v : ms) text += format_number(v) + "\n";
  const auto up = svc.upload("sub1.txt", InputKind::rri, std::nullopt, RriUnit::milliseconds, text);
  REQUIRE(up.status == 201);
  const auto id = up.body["record_id"].get<std::string>();
  CHECK(id == "sub1.txt");
  CHECK(svc.upload("sub1.txt", InputKind::rri, std::nullopt, RriUnit::milliseconds, text).body["record_id"] ==
        "sub1.txt-2");
  CHECK(svc.signal(id, std::nullopt, std::nullopt, std::nullopt).status == 400);
  const auto r = svc.analyze(id, json::object());
  REQUIRE(r.status == 200);
  CHECK(r.body["reports"][0]["metrics"]["avg_rr_ms"].get<double>() == doctest::Approx(ms.mean()).epsilon(1e-6));
  CHECK(svc.list_records().body["records"].size() == 2);
}

TEST_CASE("HTTP round trip") {
  ReviewService svc;
  ReviewServer server(svc);
  const int port = server.start("127.0.0.1", 0);
  REQUIRE(port > 0);
  httplib::Client cli("127.0.0.1", port);

  std::mt19937_64 rng(9);
  testing::SyntheticEcgOptions opt;
  opt.duration_s = 120.0;
  const auto ecg = testing::synthetic_ecg(rng, opt);
  std::string body;
  for (double v : ecg.record.samples) body += format_number(v) + "\n";

  auto up = cli.Post("/api/records?name=rec.txt&kind=ecg&fs=128", body, "text/plain");
  REQUIRE(up);
  REQUIRE(up->status == 201);
  const auto id = json::parse(up->body)["record_id"].get<std::string>();

  auto list = cli.Get("/api/records");
  REQUIRE(list);
  CHECK(json::parse(list->body)["records"][0]["length"] == ecg.record.samples.size());

  auto sig = cli.Get("/api/records/" + id + "/signal?start=0&end=15360&max_points=500");
  REQUIRE(sig);
  CHECK(sig->status == 200);
  CHECK(json::parse(sig->body)["index"].size() <= 1000);
  auto bad_query = cli.Get("/api/records/" + id + "/signal?max_points=lots");
  REQUIRE(bad_query);
  CHECK(bad_query->status == 400);

  auto det = cli.Post("/api/records/" + id + "/detect", R"({"baseline_remove": true})", "application/json");
  REQUIRE(det);
  REQUIRE(det->status == 200);
  const auto peaks = json::parse(det->body);
  const auto list_peaks = peaks["peaks"].get<std::vector<SampleIndex>>();
  CHECK(testing::score_detections(ecg.r_peaks, list_peaks, 128.0).sensitivity() > 0.99);

  const json edit = {{"remove", {list_peaks[3]}}, {"expected_version", peaks["version"]}};
  auto patch = cli.Patch("/api/records/" + id + "/peaks", edit.dump(), "application/json");
  REQUIRE(patch);
  CHECK(patch->status == 200);
  auto conflict = cli.Patch("/api/records/" + id + "/peaks", edit.dump(), "application/json");
  REQUIRE(conflict);
  CHECK(conflict->status == 409);

  auto an = cli.Post("/api/records/" + id + "/analyze", R"({"mode": "m_equals_n", "n": 2})", "application/json");
  REQUIRE(an);
  CHECK(an->status == 200);
  const auto reports = json::parse(an->body)["reports"];
  REQUIRE(reports.size() == 1);
  CHECK(reports[0]["n"] == 2);
  CHECK(reports[0]["m"] == 2);
  auto malformed = cli.Post("/api/records/" + id + "/analyze", "{not json", "application/json");
  REQUIRE(malformed);
  CHECK(malformed->status == 400);

  auto exported = cli.Get("/api/records/" + id + "/export/peaks");
  REQUIRE(exported);
  CHECK(exported->status == 200);
  const auto back = parse_peaks(exported->body);
  CHECK(back.record_id == id);
  CHECK(back.peaks.size() == list_peaks.size() - 1);

  auto missing = cli.Get("/api/records/none/peaks");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  server.stop();
}
