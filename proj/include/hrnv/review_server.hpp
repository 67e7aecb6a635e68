#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hrnv/pipeline.hpp"

namespace httplib {
class Server;
}

namespace hrnv {

/// Min-max decimation of samples[range]: when the range holds more than
/// max_points samples it is split into max_points buckets and each bucket
/// contributes its minimum and maximum in index order. Shorter ranges are
/// returned verbatim.
std::vector<std::pair<SampleIndex, double>> decimate_min_max(const Eigen::VectorXd& samples, SampleRange range,
                                                             std::size_t max_points);

/// Field-level request validation failure.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::map<std::string, std::string> fields);
  ValidationError(const std::string& field, const std::string& message);
  const std::map<std::string, std::string>& fields() const noexcept { return fields_; }

 private:
  std::map<std::string, std::string> fields_;
};

AnalysisSettings settings_from_json(const nlohmann::json& body);
nlohmann::json report_to_json(const MetricsReport& report);

/// In-memory record store behind the review API. Every method returns an
/// HTTP status and a JSON body, so the HTTP layer stays a thin router.
class ReviewService {
 public:
  struct Response {
    int status = 200;
    nlohmann::json body;
    /// Non-empty for plain-text payloads (peak export).
    std::string text;
  };

  Response list_records() const;
  Response upload(const std::string& name, InputKind kind, std::optional<double> fs, RriUnit unit,
                  std::string_view content);
  Response signal(const std::string& id, std::optional<SampleIndex> start, std::optional<SampleIndex> end,
                  std::optional<std::size_t> max_points) const;
  Response detect(const std::string& id, const nlohmann::json& body);
  Response peaks(const std::string& id) const;
  Response patch_peaks(const std::string& id, const nlohmann::json& body);
  Response analyze(const std::string& id, const nlohmann::json& body);
  Response export_peaks(const std::string& id) const;

  /// Adds a record directly (used by `serve --input` and tests). Returns its id.
  std::string add_ecg(EcgRecord record);
  std::string add_ibi(IbiSeries series);

 private:
  struct Session {
    std::string record_id;
    std::optional<EcgRecord> ecg;
    std::optional<IbiSeries> ibi;
    PeakAnnotations peaks;
    std::map<std::string, nlohmann::json> report_cache;
    mutable std::mutex mutex;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  std::string insert(std::shared_ptr<Session> session);

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// HTTP binding of ReviewService. Routes:
///   GET    /api/records
///   POST   /api/records?name=&kind=&fs=&unit=      (body: file content)
///   GET    /api/records/{id}/signal?start=&end=&max_points=
///   POST   /api/records/{id}/detect
///   GET    /api/records/{id}/peaks
///   PATCH  /api/records/{id}/peaks
///   POST   /api/records/{id}/analyze
///   GET    /api/records/{id}/export/peaks
class ReviewServer {
 public:
  explicit ReviewServer(ReviewService& service);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Serves static files (the browser editor) from `dir` at "/".
  bool mount_static(const std::string& dir);
  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port, or -1 on failure.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Binds and serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  ReviewService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace hrnv
