#include "hrnv/review_server.hpp"

#include <algorithm>
#include <charconv>

#include <httplib.h>

namespace hrnv {

using nlohmann::json;

std::vector<std::pair<SampleIndex, double>> decimate_min_max(const Eigen::VectorXd& samples, SampleRange range,
                                                             std::size_t max_points) {
  std::vector<std::pair<SampleIndex, double>> out;
  const SampleIndex len = range.length();
  if (len <= 0) return out;
  if (max_points == 0 || static_cast<std::size_t>(len) <= max_points) {
    out.reserve(static_cast<std::size_t>(len));
    for (SampleIndex i = range.start; i < range.end; ++i) out.emplace_back(i, samples[i]);
    return out;
  }
  const auto buckets = static_cast<SampleIndex>(max_points);
  out.reserve(2 * max_points);
  for (SampleIndex b = 0; b < buckets; ++b) {
    const SampleIndex lo = range.start + b * len / buckets;
    const SampleIndex hi = range.start + (b + 1) * len / buckets;
    if (hi <= lo) continue;
    Eigen::Index imin = 0, imax = 0;
    samples.segment(lo, hi - lo).minCoeff(&imin);
    samples.segment(lo, hi - lo).maxCoeff(&imax);
    const SampleIndex first = lo + std::min(imin, imax);
    const SampleIndex second = lo + std::max(imin, imax);
    out.emplace_back(first, samples[first]);
    if (second != first) out.emplace_back(second, samples[second]);
  }
  return out;
}

namespace {

std::string join_fields(const std::map<std::string, std::string>& fields) {
  std::string out;
  for (const auto& [k, v] : fields) {
    if (!out.empty()) out += "; ";
    out += k + ": " + v;
  }
  return out;
}

int status_for(Errc code) {
  switch (code) {
    case Errc::NotFound: return 404;
    case Errc::VersionConflict: return 409;
    case Errc::ValidationError:
    case Errc::InvalidConfig:
    case Errc::InvalidParameters:
    case Errc::MalformedNumeric:
    case Errc::MixedLayout:
    case Errc::EmptyFile:
    case Errc::SchemaViolation:
    case Errc::UnknownPeak:
    case Errc::DuplicatePeak:
    case Errc::OutOfRange: return 400;
    default: return 422;
  }
}

ReviewService::Response error_response(const Error& e) {
  ReviewService::Response r;
  r.status = status_for(e.code());
  r.body = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) r.body["fields"] = v->fields();
  return r;
}

template <typename F>
ReviewService::Response guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(ValidationError("body", e.what()));
  }
}

json peaks_json(const PeakAnnotations& p) {
  return {{"record_id", p.record_id}, {"fs", p.fs}, {"version", p.version}, {"peaks", p.peaks}};
}

// Reads body[key] into `out` when present, recording a field error on type
// mismatch.
template <typename T>
void read_field(const json& body, const char* key, T& out, std::map<std::string, std::string>& errors) {
  if (!body.contains(key)) return;
  try {
    out = body.at(key).get<T>();
  } catch (const json::exception&) {
    errors[key] = "has the wrong type";
  }
}

std::optional<Band> read_band(const json& bands, const char* key, std::map<std::string, std::string>& errors) {
  if (!bands.contains(key)) return std::nullopt;
  const auto& v = bands.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    errors[std::string("bands.") + key] = "must be [lo, hi]";
    return std::nullopt;
  }
  return Band{v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

ValidationError::ValidationError(std::map<std::string, std::string> fields)
    : Error(Errc::ValidationError, join_fields(fields)), fields_(std::move(fields)) {}

ValidationError::ValidationError(const std::string& field, const std::string& message)
    : ValidationError(std::map<std::string, std::string>{{field, message}}) {}

AnalysisSettings settings_from_json(const json& body) {
  AnalysisSettings s;
  std::map<std::string, std::string> errors;
  if (!body.is_object() && !body.is_null()) throw ValidationError("body", "must be a JSON object");
  if (body.is_null()) return s;

  std::string mode = "single";
  read_field(body, "mode", mode, errors);
  if (mode == "single") {
    s.mode = PlanMode::single;
  } else if (mode == "m_equals_n" || mode == "m=n") {
    s.mode = PlanMode::m_equals_n;
  } else if (mode == "all") {
    s.mode = PlanMode::all;
  } else {
    errors["mode"] = "must be single, m_equals_n or all";
  }
  read_field(body, "n", s.n, errors);
  int m = 1;
  read_field(body, "m", m, errors);
  s.m = m;
  if (s.n < 1) errors["n"] = "must be >= 1";
  if (s.mode == PlanMode::single && (m < 1 || m > s.n)) errors["m"] = "must satisfy 1 <= m <= n";

  read_field(body, "outlier_threshold", s.preprocess.threshold, errors);
  if (!(s.preprocess.threshold > 0.0 && s.preprocess.threshold < 1.0)) {
    errors["outlier_threshold"] = "must lie in (0, 1)";
  }
  std::string action = "remove";
  read_field(body, "outlier_action", action, errors);
  if (action == "remove") {
    s.preprocess.action = RepairAction::remove;
  } else if (action == "spline") {
    s.preprocess.action = RepairAction::spline;
  } else if (action == "pchip") {
    s.preprocess.action = RepairAction::pchip;
  } else if (action == "linear") {
    s.preprocess.action = RepairAction::linear;
  } else {
    errors["outlier_action"] = "must be remove, spline, pchip or linear";
  }

  std::string psd = "lomb";
  read_field(body, "psd_method", psd, errors);
  if (const auto method = parse_psd_method(psd)) {
    s.freq.method = *method;
  } else {
    errors["psd_method"] = "must be lomb, welch, fft or burg";
  }
  if (body.contains("bands")) {
    const auto& bands = body.at("bands");
    if (auto b = read_band(bands, "vlf", errors)) s.freq.vlf = *b;
    if (auto b = read_band(bands, "lf", errors)) s.freq.lf = *b;
    if (auto b = read_band(bands, "hf", errors)) s.freq.hf = *b;
    try {
      s.freq.validate();
    } catch (const Error& e) {
      errors["bands"] = e.what();
    }
  }
  read_field(body, "entropy_embedding", s.entropy.embedding, errors);
  read_field(body, "entropy_tolerance", s.entropy.tolerance_factor, errors);
  if (s.entropy.embedding < 1) errors["entropy_embedding"] = "must be >= 1";
  if (!(s.entropy.tolerance_factor > 0.0)) errors["entropy_tolerance"] = "must be positive";

  read_field(body, "baseline_remove", s.remove_baseline, errors);
  if (body.contains("segment") && !body.at("segment").is_null()) {
    const auto& seg = body.at("segment");
    if (seg.is_array() && seg.size() == 2 && seg[0].is_number_integer() && seg[1].is_number_integer()) {
      s.segment = SampleRange{seg[0].get<SampleIndex>(), seg[1].get<SampleIndex>()};
      if (s.segment->start < 0 || s.segment->start >= s.segment->end) errors["segment"] = "must satisfy 0 <= start < end";
    } else {
      errors["segment"] = "must be [start, end]";
    }
  }
  if (body.contains("detector")) {
    const auto& d = body.at("detector");
    read_field(d, "bandpass_low_hz", s.detector.bandpass_low_hz, errors);
    read_field(d, "bandpass_high_hz", s.detector.bandpass_high_hz, errors);
    read_field(d, "integration_window_ms", s.detector.integration_window_ms, errors);
    read_field(d, "refractory_ms", s.detector.refractory_ms, errors);
    read_field(d, "threshold_fraction", s.detector.threshold_fraction, errors);
    read_field(d, "searchback_factor", s.detector.searchback_factor, errors);
    read_field(d, "snap_window_ms", s.detector.snap_window_ms, errors);
    std::string snap = "auto";
    read_field(d, "snap_mode", snap, errors);
    if (snap == "auto") {
      s.detector.snap_mode = SnapMode::automatic;
    } else if (snap == "none") {
      s.detector.snap_mode = SnapMode::none;
    } else if (snap == "local_max") {
      s.detector.snap_mode = SnapMode::local_max;
    } else if (snap == "local_min") {
      s.detector.snap_mode = SnapMode::local_min;
    } else {
      errors["detector.snap_mode"] = "must be none, local_max, local_min or auto";
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return s;
}

json report_to_json(const MetricsReport& report) {
  json metrics = json::object();
  for (const auto& f : report.fields()) {
    if (!f.applicable) continue;
    metrics[f.name] = f.value ? json(*f.value) : json(nullptr);
  }
  return {{"record_id", report.record_id},
          {"n", report.n},
          {"m", report.m},
          {"psd_method", std::string(to_string(report.freq.method))},
          {"metrics", metrics},
          {"not_computable", report.not_computable}};
}

std::shared_ptr<ReviewService::Session> ReviewService::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::NotFound, "no record '" + id + "'");
  return it->second;
}

std::string ReviewService::insert(std::shared_ptr<Session> session) {
  std::unique_lock lock(mutex_);
  std::string id = session->record_id.empty() ? "record" : session->record_id;
  for (int k = 2; sessions_.contains(id); ++k) id = session->record_id + "-" + std::to_string(k);
  session->record_id = id;
  session->peaks.record_id = id;
  if (session->ecg) session->ecg->record_id = id;
  if (session->ibi) session->ibi->record_id = id;
  sessions_.emplace(id, std::move(session));
  return id;
}

std::string ReviewService::add_ecg(EcgRecord record) {
  record.validate();
  auto session = std::make_shared<Session>();
  session->record_id = record.record_id;
  session->peaks.fs = record.fs;
  session->peaks.segment = record.segment;
  session->ecg = std::move(record);
  return insert(std::move(session));
}

std::string ReviewService::add_ibi(IbiSeries series) {
  auto session = std::make_shared<Session>();
  session->record_id = series.record_id;
  session->ibi = std::move(series);
  return insert(std::move(session));
}

ReviewService::Response ReviewService::list_records() const {
  json list = json::array();
  std::shared_lock lock(mutex_);
  for (const auto& [id, s] : sessions_) {
    std::lock_guard guard(s->mutex);
    json entry = {{"id", id},
                  {"kind", s->ecg ? "ecg" : "rri"},
                  {"peak_count", s->peaks.peaks.size()},
                  {"version", s->peaks.version}};
    if (s->ecg) {
      entry["fs"] = s->ecg->fs;
      entry["length"] = s->ecg->samples.size();
    } else {
      entry["fs"] = nullptr;
      entry["length"] = s->ibi->size();
    }
    list.push_back(std::move(entry));
  }
  return {200, {{"records", list}}, {}};
}

ReviewService::Response ReviewService::upload(const std::string& name, InputKind kind, std::optional<double> fs,
                                              RriUnit unit, std::string_view content) {
  return guarded([&]() -> Response {
    if (name.empty()) throw ValidationError("name", "is required");
    if (kind == InputKind::ecg && !fs) throw ValidationError("fs", "is required for ECG uploads");
    auto loaded = parse_signal(content, kind, extract_record_id(name, "", ""), fs, unit);
    std::string id;
    if (auto* ecg = std::get_if<EcgRecord>(&loaded)) {
      id = add_ecg(std::move(*ecg));
    } else if (auto* ibi = std::get_if<IbiSeries>(&loaded)) {
      id = add_ibi(std::move(*ibi));
    } else {
      const auto& peaks = std::get<PeakAnnotations>(loaded);
      id = add_ibi(ibi_from_peaks(peaks));
    }
    return {201, {{"record_id", id}}, {}};
  });
}

ReviewService::Response ReviewService::signal(const std::string& id, std::optional<SampleIndex> start,
                                              std::optional<SampleIndex> end,
                                              std::optional<std::size_t> max_points) const {
  return guarded([&]() -> Response {
    const auto s = find(id);
    std::lock_guard guard(s->mutex);
    if (!s->ecg) throw ValidationError("record", "has no waveform (loaded as intervals)");
    const auto len = static_cast<SampleIndex>(s->ecg->samples.size());
    const SampleRange range{start.value_or(0), end.value_or(len)};
    if (range.start < 0 || range.end > len || range.start >= range.end) {
      throw ValidationError("range", "must satisfy 0 <= start < end <= " + std::to_string(len));
    }
    const auto limit = max_points.value_or(2000);
    const auto points = decimate_min_max(s->ecg->samples, range, limit);
    json idx = json::array();
    json val = json::array();
    for (const auto& [i, v] : points) {
      idx.push_back(i);
      val.push_back(v);
    }
    return {200,
            {{"start", range.start},
             {"end", range.end},
             {"fs", s->ecg->fs},
             {"decimated", static_cast<std::size_t>(range.length()) > limit},
             {"index", idx},
             {"value", val}},
            {}};
  });
}

ReviewService::Response ReviewService::detect(const std::string& id, const json& body) {
  return guarded([&]() -> Response {
    const auto settings = settings_from_json(body);
    const auto s = find(id);
    std::lock_guard guard(s->mutex);
    if (!s->ecg) throw ValidationError("record", "has no waveform (loaded as intervals)");
    auto detected = detect_for_settings(*s->ecg, settings);
    detected.record_id = s->record_id;
    detected.version = s->peaks.version + 1;
    s->peaks = std::move(detected);
    return {200, peaks_json(s->peaks), {}};
  });
}

ReviewService::Response ReviewService::peaks(const std::string& id) const {
  return guarded([&]() -> Response {
    const auto s = find(id);
    std::lock_guard guard(s->mutex);
    return {200, peaks_json(s->peaks), {}};
  });
}

ReviewService::Response ReviewService::patch_peaks(const std::string& id, const json& body) {
  return guarded([&]() -> Response {
    std::map<std::string, std::string> errors;
    std::vector<SampleIndex> add, remove;
    std::uint64_t expected = 0;
    if (!body.is_object()) throw ValidationError("body", "must be a JSON object");
    read_field(body, "add", add, errors);
    read_field(body, "remove", remove, errors);
    if (!body.contains("expected_version")) {
      errors["expected_version"] = "is required";
    } else {
      read_field(body, "expected_version", expected, errors);
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));

    const auto s = find(id);
    std::lock_guard guard(s->mutex);
    if (!s->ecg) throw ValidationError("record", "has no waveform (loaded as intervals)");
    if (expected != s->peaks.version) {
      Response r;
      r.status = 409;
      r.body = {{"error", "VersionConflict"},
                {"message", "expected version " + std::to_string(expected) + ", current is " +
                                std::to_string(s->peaks.version)},
                {"current", peaks_json(s->peaks)}};
      return r;
    }
    s->peaks = apply_peak_edits(s->peaks, add, remove, static_cast<SampleIndex>(s->ecg->samples.size()));
    return {200, peaks_json(s->peaks), {}};
  });
}

ReviewService::Response ReviewService::analyze(const std::string& id, const json& body) {
  return guarded([&]() -> Response {
    const auto settings = settings_from_json(body);
    const auto s = find(id);
    std::lock_guard guard(s->mutex);
    const auto key = std::to_string(s->peaks.version) + "|" + body.dump();
    if (const auto it = s->report_cache.find(key); it != s->report_cache.end()) return {200, it->second, {}};
    const auto reports = s->ecg ? analyze_peaks(s->peaks, settings) : analyze_ibi(*s->ibi, settings);
    json list = json::array();
    for (const auto& r : reports) list.push_back(report_to_json(r));
    json out = {{"record_id", s->record_id}, {"version", s->peaks.version}, {"reports", list}};
    s->report_cache[key] = out;
    return {200, out, {}};
  });
}

ReviewService::Response ReviewService::export_peaks(const std::string& id) const {
  return guarded([&]() -> Response {
    const auto s = find(id);
    std::lock_guard guard(s->mutex);
    Response r;
    r.text = format_peaks(s->peaks);
    return r;
  });
}

namespace {

template <typename T>
std::optional<T> query_number(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  const auto v = req.get_param_value(key);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError(key, "is not a number");
  }
  return out;
}

void send(httplib::Response& res, const ReviewService::Response& r) {
  res.status = r.status;
  if (!r.text.empty()) {
    res.set_content(r.text, "text/plain; charset=utf-8");
  } else {
    res.set_content(r.body.dump(), "application/json");
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

ReviewServer::ReviewServer(ReviewService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ReviewServer::~ReviewServer() { stop(); }

bool ReviewServer::mount_static(const std::string& dir) { return server_->set_mount_point("/", dir); }

void ReviewServer::install_routes() {
  auto& srv = *server_;
  auto wrap = [](auto&& handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        send(res, handler(req));
      } catch (const Error& e) {
        send(res, error_response(e));
      } catch (const json::exception& e) {
        send(res, error_response(ValidationError("body", e.what())));
      }
    };
  };
  srv.Get("/api/records", wrap([this](const httplib::Request&) { return service_.list_records(); }));
  srv.Post("/api/records", wrap([this](const httplib::Request& req) {
             const auto kind_name = req.has_param("kind") ? req.get_param_value("kind") : "ecg";
             InputKind kind = InputKind::ecg;
             if (kind_name == "rri") {
               kind = InputKind::rri;
             } else if (kind_name == "peaks") {
               kind = InputKind::peaks;
             } else if (kind_name != "ecg") {
               throw ValidationError("kind", "must be ecg, rri or peaks");
             }
             const auto unit = req.has_param("unit") && req.get_param_value("unit") == "ms" ? RriUnit::milliseconds
                                                                                            : RriUnit::seconds;
             const auto name = req.has_param("name") ? req.get_param_value("name") : "";
             return service_.upload(name, kind, query_number<double>(req, "fs"), unit, req.body);
           }));
  srv.Get(R"(/api/records/([^/]+)/signal)", wrap([this](const httplib::Request& req) {
            return service_.signal(req.matches[1], query_number<SampleIndex>(req, "start"),
                                   query_number<SampleIndex>(req, "end"), query_number<std::size_t>(req, "max_points"));
          }));
  srv.Post(R"(/api/records/([^/]+)/detect)", wrap([this](const httplib::Request& req) {
             return service_.detect(req.matches[1], parse_body(req));
           }));
  srv.Get(R"(/api/records/([^/]+)/peaks)",
          wrap([this](const httplib::Request& req) { return service_.peaks(req.matches[1]); }));
  srv.Patch(R"(/api/records/([^/]+)/peaks)", wrap([this](const httplib::Request& req) {
              return service_.patch_peaks(req.matches[1], parse_body(req));
            }));
  srv.Post(R"(/api/records/([^/]+)/analyze)", wrap([this](const httplib::Request& req) {
             return service_.analyze(req.matches[1], parse_body(req));
           }));
  srv.Get(R"(/api/records/([^/]+)/export/peaks)",
          wrap([this](const httplib::Request& req) { return service_.export_peaks(req.matches[1]); }));
}

int ReviewServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) return -1;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

bool ReviewServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

void ReviewServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace hrnv
