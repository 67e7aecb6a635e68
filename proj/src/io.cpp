#include "hrnv/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace hrnv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ',' || c == ';' || c == '\t' || c == ' '; };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    const auto start = i;
    while (i < line.size() && !is_sep(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<SampleIndex> to_index(std::string_view s) {
  SampleIndex v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::string_view to_string(InputKind kind) noexcept {
  switch (kind) {
    case InputKind::ecg: return "ecg";
    case InputKind::rri: return "rri";
    case InputKind::peaks: return "peaks";
  }
  return "rri";
}

std::string InputDescriptor::record_id() const {
  return extract_record_id(path.filename().string(), prefix, postfix);
}

std::string format_number(double value, int digits) {
  char buf[64];
  const auto res = digits > 0 ? std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, digits)
                              : std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::WriteFailure, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw Error(Errc::WriteFailure, "failed writing " + path.string());
}

std::vector<double> parse_numeric_series(std::string_view text) {
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    rows.emplace_back(i + 1, split_fields(line));
  }
  if (rows.empty()) throw Error(Errc::EmptyFile, "no numeric data");
  if (rows.size() > 1) {
    for (const auto& [line_no, fields] : rows) {
      if (fields.size() > 1) {
        throw Error(Errc::MixedLayout, "line " + std::to_string(line_no) +
                                           " has several fields but the data spans several lines");
      }
    }
  }
  std::vector<double> values;
  for (const auto& [line_no, fields] : rows) {
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const auto v = to_double(fields[f]);
      if (!v) {
        throw Error(Errc::MalformedNumeric, "line " + std::to_string(line_no) + " field " +
                                                std::to_string(f + 1) + ": '" + std::string(fields[f]) + "'");
      }
      values.push_back(*v);
    }
  }
  return values;
}

LoadedInput parse_signal(std::string_view text, InputKind kind, const std::string& record_id,
                         std::optional<double> fs, RriUnit unit) {
  if (kind == InputKind::peaks) return parse_peaks(text);
  const auto values = parse_numeric_series(text);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  if (kind == InputKind::ecg) {
    if (!fs || !(*fs > 0.0)) throw Error(Errc::InvalidParameters, "ECG input requires a positive fs");
    EcgRecord rec;
    rec.record_id = record_id;
    rec.fs = *fs;
    rec.samples = std::move(v);
    return rec;
  }
  if (unit == RriUnit::seconds) v *= 1000.0;
  return IbiSeries::from_intervals(record_id, std::move(v));
}

LoadedInput read_signal(const InputDescriptor& desc) {
  const auto text = read_text_file(desc.path);
  return parse_signal(text, desc.kind, desc.record_id(), desc.fs, desc.rri_unit);
}

std::string format_peaks(const PeakAnnotations& peaks) {
  std::string out = "# record=" + peaks.record_id + "\n# fs_hz=" + format_number(peaks.fs) + "\n";
  if (peaks.segment) {
    out += "# segment=" + std::to_string(peaks.segment->start) + ":" + std::to_string(peaks.segment->end) + "\n";
  }
  for (auto p : peaks.peaks) {
    out += std::to_string(p);
    out += '\n';
  }
  return out;
}

PeakAnnotations parse_peaks(std::string_view text) {
  PeakAnnotations out;
  bool have_record = false;
  bool have_fs = false;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto where = " at line " + std::to_string(i + 1);
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = trim(body.substr(0, eq));
      const auto value = trim(body.substr(eq + 1));
      if (key == "record") {
        out.record_id = std::string(value);
        have_record = true;
      } else if (key == "fs_hz") {
        const auto fs = to_double(value);
        if (!fs || !(*fs > 0.0)) throw Error(Errc::SchemaViolation, "bad fs_hz" + where);
        out.fs = *fs;
        have_fs = true;
      } else if (key == "segment") {
        const auto colon = value.find(':');
        const auto a = colon == std::string_view::npos ? std::nullopt : to_index(value.substr(0, colon));
        const auto b = colon == std::string_view::npos ? std::nullopt : to_index(value.substr(colon + 1));
        if (!a || !b || *a < 0 || *a >= *b) throw Error(Errc::SchemaViolation, "bad segment" + where);
        out.segment = SampleRange{*a, *b};
      }
      continue;
    }
    const auto idx = to_index(line);
    if (!idx || *idx < 0) throw Error(Errc::SchemaViolation, "bad sample index" + where);
    if (!out.peaks.empty() && *idx <= out.peaks.back()) {
      throw Error(Errc::SchemaViolation, "peak indices must increase strictly" + where);
    }
    out.peaks.push_back(*idx);
  }
  if (!have_record) throw Error(Errc::SchemaViolation, "missing '# record=' header");
  if (!have_fs) throw Error(Errc::SchemaViolation, "missing '# fs_hz=' header");
  out.version = 0;
  return out;
}

void write_peaks(const std::filesystem::path& path, const PeakAnnotations& peaks) {
  write_text_file(path, format_peaks(peaks));
}

PeakAnnotations read_peaks(const std::filesystem::path& path) { return parse_peaks(read_text_file(path)); }

std::string format_report(std::span<const ReportRow> rows) {
  std::vector<std::pair<int, int>> plans;
  bool any_failure = false;
  for (const auto& row : rows) {
    if (const auto* r = std::get_if<MetricsReport>(&row)) {
      plans.emplace_back(r->n, r->m);
    } else {
      any_failure = true;
    }
  }
  std::sort(plans.begin(), plans.end());
  plans.erase(std::unique(plans.begin(), plans.end()), plans.end());
  const auto& names = report_metric_names();

  std::string out = "record_id,n,m";
  for (const auto& [n, m] : plans) {
    for (const auto& name : names) out += "," + plan_prefix(n, m) + name;
  }
  if (any_failure) out += ",error";
  out += '\n';

  for (const auto& row : rows) {
    if (const auto* r = std::get_if<MetricsReport>(&row)) {
      out += csv_escape(r->record_id) + "," + std::to_string(r->n) + "," + std::to_string(r->m);
      const auto fields = r->fields();
      for (const auto& [n, m] : plans) {
        const bool own = n == r->n && m == r->m;
        for (const auto& f : fields) {
          out += ',';
          if (!own || !f.applicable) continue;
          out += f.value ? format_number(*f.value, 10) : "NA";
        }
        out += ',';
        if (own) out += to_string(r->freq.method);
      }
      if (any_failure) out += ',';
    } else {
      const auto& fail = std::get<RecordFailure>(row);
      out += csv_escape(fail.record_id) + ",,";
      out += std::string(plans.size() * names.size(), ',');
      out += "," + csv_escape(std::string(to_string(fail.code)) + ": " + fail.message);
    }
    out += '\n';
  }
  return out;
}

std::string format_report(std::span<const MetricsReport> reports) {
  std::vector<ReportRow> rows(reports.begin(), reports.end());
  return format_report(std::span<const ReportRow>(rows));
}

void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path) {
  write_text_file(path, format_report(rows));
}

void write_report(std::span<const MetricsReport> reports, const std::filesystem::path& path) {
  write_text_file(path, format_report(reports));
}

std::vector<MetricsReport> parse_report(std::string_view text, std::vector<RecordFailure>* failures) {
  const auto lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw Error(Errc::SchemaViolation, "report has no header");
  const auto header = parse_csv_line(lines[first]);
  if (header.size() < 3 || header[0] != "record_id" || header[1] != "n" || header[2] != "m") {
    throw Error(Errc::SchemaViolation, "report header must start with record_id,n,m");
  }
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) column[header[c]] = c;
  const auto error_col = column.find("error");

  std::vector<MetricsReport> out;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto cells = parse_csv_line(lines[li]);
    const auto where = " at line " + std::to_string(li + 1);
    if (cells.size() != header.size()) throw Error(Errc::SchemaViolation, "wrong cell count" + where);
    if (error_col != column.end() && !cells[error_col->second].empty()) {
      if (failures) {
        RecordFailure f;
        f.record_id = cells[0];
        const auto& text = cells[error_col->second];
        const auto colon = text.find(": ");
        const auto code = colon == std::string::npos ? std::nullopt : parse_errc(text.substr(0, colon));
        f.code = code.value_or(Errc::IoError);
        f.message = code ? text.substr(colon + 2) : text;
        failures->push_back(std::move(f));
      }
      continue;
    }
    MetricsReport r;
    r.record_id = cells[0];
    const auto n = to_index(cells[1]);
    const auto m = to_index(cells[2]);
    if (!n || !m) throw Error(Errc::SchemaViolation, "bad n/m" + where);
    r.n = static_cast<int>(*n);
    r.m = static_cast<int>(*m);
    const auto prefix = plan_prefix(r.n, r.m);
    for (const auto& name : report_metric_names()) {
      const auto it = column.find(prefix + name);
      if (it == column.end()) throw Error(Errc::SchemaViolation, "missing column " + prefix + name);
      const auto& cell = cells[it->second];
      if (name == "psd_method") {
        const auto method = parse_psd_method(cell);
        if (!method) throw Error(Errc::SchemaViolation, "unknown psd method '" + cell + "'" + where);
        r.freq.method = *method;
        continue;
      }
      if (name.starts_with("ibi_") && !cell.empty()) r.beats.detailed = true;
      if (cell.empty() || cell == "NA") continue;
      const auto v = to_double(cell);
      if (!v) throw Error(Errc::SchemaViolation, "bad number '" + cell + "'" + where);
      if (auto* slot = r.find(name)) {
        *slot = *v;
      } else {
        r.set_band_edge(name, *v);
      }
    }
    r.mark_not_computable();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MetricsReport> read_report(const std::filesystem::path& path) {
  return parse_report(read_text_file(path));
}

}  // namespace hrnv
