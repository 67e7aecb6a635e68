#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

#include <CLI11.hpp>

#include "hrnv/pipeline.hpp"
#include "hrnv/review_server.hpp"

namespace hrnv::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> inputs;
  std::string list_file;
  std::string type = "rri";
  std::optional<double> fs;
  std::string unit = "s";
  std::string segment;
  bool baseline_remove = false;
  std::string snap = "auto";
  double threshold = 0.2;
  std::string action = "remove";
  std::string mode = "single";
  int n = 1;
  int m = 1;
  std::string psd = "lomb";
  std::string vlf = "0:0.04";
  std::string lf = "0.04:0.15";
  std::string hf = "0.15:0.4";
  int entropy_m = 2;
  double entropy_r = 0.15;
  std::string prefix;
  std::string postfix;
  std::string out;
  bool strict = false;
  unsigned jobs = 1;
  bool unattended_ecg = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::vector<std::string> compare_files;
};

template <typename T>
T parse_number(std::string_view text, const std::string& flag) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError(flag + ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

template <typename T>
std::pair<T, T> parse_pair(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError(flag + ": expected <lo>:<hi>, got '" + text + "'");
  return {parse_number<T>(std::string_view(text).substr(0, colon), flag),
          parse_number<T>(std::string_view(text).substr(colon + 1), flag)};
}

InputKind parse_kind(const std::string& s) {
  if (s == "ecg") return InputKind::ecg;
  if (s == "peaks") return InputKind::peaks;
  return InputKind::rri;
}

SnapMode parse_snap(const std::string& s) {
  if (s == "none") return SnapMode::none;
  if (s == "max") return SnapMode::local_max;
  if (s == "min") return SnapMode::local_min;
  return SnapMode::automatic;
}

RepairAction parse_action(const std::string& s) {
  if (s == "spline") return RepairAction::spline;
  if (s == "pchip") return RepairAction::pchip;
  if (s == "linear") return RepairAction::linear;
  return RepairAction::remove;
}

PlanMode parse_mode(const std::string& s) {
  if (s == "m_equals_n") return PlanMode::m_equals_n;
  if (s == "all") return PlanMode::all;
  return PlanMode::single;
}

AnalysisSettings build_settings(const Options& o) {
  AnalysisSettings s;
  if (!o.segment.empty()) {
    const auto [a, b] = parse_pair<SampleIndex>(o.segment, "--segment");
    if (a < 0 || a >= b) throw UsageError("--segment: expected 0 <= start < end");
    s.segment = SampleRange{a, b};
  }
  s.remove_baseline = o.baseline_remove;
  s.detector.snap_mode = parse_snap(o.snap);
  s.preprocess.threshold = o.threshold;
  s.preprocess.action = parse_action(o.action);
  s.mode = parse_mode(o.mode);
  s.n = o.n;
  s.m = o.m;
  if (s.mode == PlanMode::single && (*s.m < 1 || *s.m > s.n)) throw UsageError("--m: expected 1 <= m <= n");
  s.freq.method = *parse_psd_method(o.psd);
  auto band = [](const std::string& text, const std::string& flag) {
    const auto [lo, hi] = parse_pair<double>(text, flag);
    return Band{lo, hi};
  };
  s.freq.vlf = band(o.vlf, "--vlf");
  s.freq.lf = band(o.lf, "--lf");
  s.freq.hf = band(o.hf, "--hf");
  s.entropy.embedding = o.entropy_m;
  s.entropy.tolerance_factor = o.entropy_r;
  try {
    s.preprocess.validate();
    s.freq.validate();
    s.entropy.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return s;
}

InputDescriptor build_descriptor(const Options& o, const std::string& path) {
  InputDescriptor d;
  d.path = path;
  d.kind = parse_kind(o.type);
  d.fs = o.fs;
  d.rri_unit = o.unit == "ms" ? RriUnit::milliseconds : RriUnit::seconds;
  d.prefix = o.prefix;
  d.postfix = o.postfix;
  if (d.kind == InputKind::ecg && !d.fs) throw UsageError("--fs: required when --type ecg");
  return d;
}

std::vector<std::string> expand_inputs(const Options& o) {
  std::vector<std::string> paths;
  auto add = [&](const std::string& p) {
    if (fs::is_directory(p)) {
      std::vector<std::string> files;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file()) files.push_back(entry.path().string());
      }
      std::sort(files.begin(), files.end());
      paths.insert(paths.end(), files.begin(), files.end());
    } else {
      paths.push_back(p);
    }
  };
  for (const auto& p : o.inputs) add(p);
  if (!o.list_file.empty()) {
    std::ifstream in(o.list_file);
    if (!in) throw UsageError("--list: cannot open '" + o.list_file + "'");
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) add(line);
    }
  }
  return paths;
}

void emit(const Options& o, std::string_view text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
  } else {
    write_text_file(o.out, text);
  }
}

int finish_reports(const Options& o, const BatchResult& result, std::ostream& out, std::ostream& err) {
  for (const auto& row : result.rows) {
    if (const auto* f = std::get_if<RecordFailure>(&row)) err << "error: " << f->source << ": " << f->message << '\n';
  }
  emit(o, format_report(result.rows), out);
  return o.strict && result.failure_count() > 0 ? kRecordFailure : kSuccess;
}

int cmd_analyze(const Options& o, bool batch, std::ostream& out, std::ostream& err) {
  const auto settings = build_settings(o);
  const auto paths = expand_inputs(o);
  if (!batch && paths.size() != 1) throw UsageError("--input: analyze takes exactly one input");
  std::vector<AnalysisRequest> requests;
  requests.reserve(paths.size());
  for (const auto& p : paths) {
    requests.push_back({build_descriptor(o, p), settings, batch ? o.unattended_ecg : true});
  }
  return finish_reports(o, analyze_batch(requests, batch ? std::max(1u, o.jobs) : 1u), out, err);
}

int cmd_detect(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.inputs.size() != 1) throw UsageError("--input: detect takes exactly one input");
  if (!o.fs) throw UsageError("--fs: required for detect");
  auto settings = build_settings(o);
  auto desc = build_descriptor(o, o.inputs.front());
  desc.kind = InputKind::ecg;
  try {
    const auto loaded = read_signal(desc);
    const auto peaks = detect_for_settings(std::get<EcgRecord>(loaded), settings);
    emit(o, format_peaks(peaks), out);
    return kSuccess;
  } catch (const Error& e) {
    err << "error: " << desc.path.string() << ": " << e.what() << '\n';
    return kRecordFailure;
  }
}

bool looks_like_peaks(const std::string& text) { return text.rfind('#', 0) == 0; }

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.compare_files.size() != 2) throw UsageError("compare: expected two files");
  try {
    const auto first = read_text_file(o.compare_files[0]);
    const auto second = read_text_file(o.compare_files[1]);
    if (looks_like_peaks(first) != looks_like_peaks(second)) {
      throw UsageError("compare: both files must be peaks files or both report tables");
    }
    if (looks_like_peaks(first)) {
      const auto d = compare_annotations(parse_peaks(first), parse_peaks(second));
      out << "d_l1," << d << '\n';
      return kSuccess;
    }
    const auto candidate = parse_report(first);
    const auto reference = parse_report(second);
    std::map<std::tuple<std::string, int, int>, const MetricsReport*> by_key;
    for (const auto& r : reference) by_key[{r.record_id, r.n, r.m}] = &r;
    std::string text = "record_id,n,m,metric,epsilon,status_agrees\n";
    for (const auto& h : candidate) {
      const auto it = by_key.find({h.record_id, h.n, h.m});
      if (it == by_key.end()) {
        throw Error(Errc::PlanMismatch, "no reference row for " + h.record_id + " (" + std::to_string(h.n) + ", " +
                                            std::to_string(h.m) + ")");
      }
      for (const auto& c : compare_reports(h, *it->second)) {
        text += h.record_id + ',' + std::to_string(h.n) + ',' + std::to_string(h.m) + ',' + c.name + ',' +
                (c.epsilon ? format_number(*c.epsilon, 10) : std::string("NA")) + ',' +
                (c.status_agrees ? "true" : "false") + '\n';
      }
    }
    emit(o, text, out);
    return kSuccess;
  } catch (const CountMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kRecordFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kRecordFailure;
  }
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  ReviewService service;
  for (const auto& p : expand_inputs(o)) {
    const auto desc = build_descriptor(o, p);
    try {
      const auto loaded = read_signal(desc);
      if (const auto* ecg = std::get_if<EcgRecord>(&loaded)) {
        service.add_ecg(*ecg);
      } else if (const auto* ibi = std::get_if<IbiSeries>(&loaded)) {
        service.add_ibi(*ibi);
      } else {
        service.add_ibi(ibi_from_peaks(std::get<PeakAnnotations>(loaded)));
      }
    } catch (const Error& e) {
      err << "error: " << p << ": " << e.what() << '\n';
      if (o.strict) return kRecordFailure;
    }
  }
  ReviewServer server(service);
  if (!o.static_dir.empty() && !server.mount_static(o.static_dir)) {
    throw UsageError("--static: '" + o.static_dir + "' is not a directory");
  }
  out << "listening on http://" << o.host << ':' << o.port << std::endl;
  if (!server.listen(o.host, o.port)) {
    err << "error: cannot bind " << o.host << ':' << o.port << '\n';
    return kRecordFailure;
  }
  return kSuccess;
}

void add_input_options(CLI::App& sub, Options& o, bool many) {
  if (many) {
    sub.add_option("--input,-i", o.inputs, "Input files or directories");
    sub.add_option("--list", o.list_file, "File listing one input path per line");
  } else {
    sub.add_option("--input,-i", o.inputs, "Input file")->required()->expected(1);
  }
  sub.add_option("--type", o.type, "Input kind")
      ->check(CLI::IsMember({"ecg", "rri", "peaks"}))
      ->capture_default_str();
  sub.add_option("--fs", o.fs, "ECG sampling rate in Hz (required for ecg)");
  sub.add_option("--unit", o.unit, "Unit of RRI values")->check(CLI::IsMember({"s", "ms"}))->capture_default_str();
  sub.add_option("--prefix", o.prefix, "File-name prefix stripped to form the record id");
  sub.add_option("--postfix", o.postfix, "File-name postfix stripped to form the record id");
}

void add_detector_options(CLI::App& sub, Options& o) {
  sub.add_option("--segment", o.segment, "ECG sample range <start>:<end> (default: whole record)");
  sub.add_flag("--baseline-remove", o.baseline_remove, "Remove baseline drift before detection (default: off)");
  sub.add_option("--snap", o.snap, "Snap detected peaks to the local extremum")
      ->check(CLI::IsMember({"none", "max", "min", "auto"}))
      ->capture_default_str();
}

void add_analysis_options(CLI::App& sub, Options& o) {
  add_detector_options(sub, o);
  sub.add_option("--threshold", o.threshold, "Ectopic threshold: relative deviation from the local median")
      ->capture_default_str();
  sub.add_option("--action", o.action, "Handling of flagged intervals")
      ->check(CLI::IsMember({"remove", "spline", "pchip", "linear"}))
      ->capture_default_str();
  sub.add_option("--mode", o.mode, "Plan mode")
      ->check(CLI::IsMember({"single", "m_equals_n", "all"}))
      ->capture_default_str();
  sub.add_option("--n", o.n, "Intervals summed per HRnV window")->check(CLI::PositiveNumber)->capture_default_str();
  sub.add_option("--m", o.m, "Stride between window starts (single mode)")->check(CLI::PositiveNumber)->capture_default_str();
  sub.add_option("--psd", o.psd, "Power spectrum estimator")
      ->check(CLI::IsMember({"lomb", "welch", "fft", "burg"}))
      ->capture_default_str();
  sub.add_option("--vlf", o.vlf, "VLF band in Hz, <lo>:<hi>")->capture_default_str();
  sub.add_option("--lf", o.lf, "LF band in Hz, <lo>:<hi>")->capture_default_str();
  sub.add_option("--hf", o.hf, "HF band in Hz, <lo>:<hi>")->capture_default_str();
  sub.add_option("--entropy-m", o.entropy_m, "Entropy embedding dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub.add_option("--entropy-r", o.entropy_r, "Entropy tolerance as a fraction of SDRR")->capture_default_str();
  sub.add_option("--out,-o", o.out, "Output file (default: standard output)");
  sub.add_flag("--strict", o.strict, "Exit with status 1 when any record fails (default: off)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heart rate n-variability analysis"};
  app.name("hrnv");
  app.require_subcommand(1);
  Options o;

  auto* analyze = app.add_subcommand("analyze", "Analyze one ECG, RRI or peaks file");
  add_input_options(*analyze, o, false);
  add_analysis_options(*analyze, o);

  auto* batch = app.add_subcommand("batch", "Analyze many files into one report table");
  add_input_options(*batch, o, true);
  add_analysis_options(*batch, o);
  batch->add_option("--jobs,-j", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  batch->add_flag("--unattended-ecg", o.unattended_ecg,
                  "Accept ECG inputs, analyzed with automatic detection and no review (default: off)");

  auto* detect = app.add_subcommand("detect", "Detect R peaks in an ECG and write a peaks file");
  add_input_options(*detect, o, false);
  add_detector_options(*detect, o);
  detect->add_option("--out,-o", o.out, "Output peaks file (default: standard output)");

  auto* compare = app.add_subcommand("compare", "Compare two peaks files or two report tables");
  compare->add_option("files", o.compare_files, "Candidate then reference file")->required()->expected(2);
  compare->add_option("--out,-o", o.out, "Output file (default: standard output)");

  auto* serve = app.add_subcommand("serve", "Start the peak review server");
  add_input_options(*serve, o, true);
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--port", o.port, "Port")->check(CLI::Range(1, 65535))->capture_default_str();
  serve->add_option("--static", o.static_dir, "Directory served at / (the browser editor)");
  serve->add_flag("--strict", o.strict, "Exit when a preloaded input fails (default: off)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (*analyze) return cmd_analyze(o, false, out, err);
    if (*batch) return cmd_analyze(o, true, out, err);
    if (*detect) return cmd_detect(o, out, err);
    if (*compare) return cmd_compare(o, out, err);
    return cmd_serve(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kRecordFailure;
  }
}

}  // namespace hrnv::cli
