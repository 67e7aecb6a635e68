#include "hrnv/report.hpp"

#include <array>
#include <utility>

namespace hrnv {

namespace {

template <typename Report, typename F>
void visit_metrics(Report& r, F&& f) {
  f("avg_rr_ms", r.time.avg_rr_ms);
  f("sdrr_ms", r.time.sdrr_ms);
  f("avg_hr_bpm", r.time.avg_hr_bpm);
  f("sdhr_bpm", r.time.sdhr_bpm);
  f("rmssd_ms", r.time.rmssd_ms);
  f("nn50x_count", r.time.nn50x_count);
  f("pnn50x_pct", r.time.pnn50x_pct);
  f("rr_skewness", r.time.skewness);
  f("rr_kurtosis", r.time.kurtosis);
  f("rr_triangular_index", r.time.triangular_index);
  f("vlf_peak_hz", r.freq.vlf_peak_hz);
  f("lf_peak_hz", r.freq.lf_peak_hz);
  f("hf_peak_hz", r.freq.hf_peak_hz);
  f("vlf_power_ms2", r.freq.vlf_power_ms2);
  f("lf_power_ms2", r.freq.lf_power_ms2);
  f("hf_power_ms2", r.freq.hf_power_ms2);
  f("vlf_pct", r.freq.vlf_pct);
  f("lf_pct", r.freq.lf_pct);
  f("hf_pct", r.freq.hf_pct);
  f("lf_nu", r.freq.lf_nu);
  f("hf_nu", r.freq.hf_nu);
  f("total_power_ms2", r.freq.total_power_ms2);
  f("lf_hf_ratio", r.freq.lf_hf_ratio);
  f("sd1_ms", r.nonlinear.sd1_ms);
  f("sd2_ms", r.nonlinear.sd2_ms);
  f("apen", r.nonlinear.apen);
  f("sampen", r.nonlinear.sampen);
  f("dfa_alpha1", r.nonlinear.dfa_alpha1);
  f("dfa_alpha2", r.nonlinear.dfa_alpha2);
  f("beat_count", r.beats.beat_count);
  f("ibi_total", r.beats.ibi_total);
  f("ibi_abnormal", r.beats.ibi_abnormal);
  f("ibi_clean", r.beats.ibi_clean);
  f("ibi_clean_pct", r.beats.ibi_clean_pct);
}

bool is_detail_only(std::string_view name) {
  return name == "ibi_total" || name == "ibi_abnormal" || name == "ibi_clean" || name == "ibi_clean_pct";
}

struct BandEdge {
  const char* name;
  Band FreqMetrics::*band;
  double Band::*edge;
};

constexpr std::array<BandEdge, 6> kBandEdges{{
    {"vlf_lo_hz", &FreqMetrics::vlf, &Band::lo},
    {"vlf_hi_hz", &FreqMetrics::vlf, &Band::hi},
    {"lf_lo_hz", &FreqMetrics::lf, &Band::lo},
    {"lf_hi_hz", &FreqMetrics::lf, &Band::hi},
    {"hf_lo_hz", &FreqMetrics::hf, &Band::lo},
    {"hf_hi_hz", &FreqMetrics::hf, &Band::hi},
}};

}  // namespace

std::vector<ReportField> MetricsReport::fields() const {
  std::vector<ReportField> out;
  visit_metrics(*this, [&](const char* name, const std::optional<double>& v) {
    out.push_back({name, v, beats.detailed || !is_detail_only(name)});
  });
  for (const auto& e : kBandEdges) out.push_back({e.name, freq.*(e.band).*(e.edge), true});
  return out;
}

std::optional<double>* MetricsReport::find(std::string_view name) {
  std::optional<double>* hit = nullptr;
  visit_metrics(*this, [&](const char* field, std::optional<double>& v) {
    if (name == field) hit = &v;
  });
  return hit;
}

bool MetricsReport::set_band_edge(std::string_view name, double value) {
  for (const auto& e : kBandEdges) {
    if (name == e.name) {
      freq.*(e.band).*(e.edge) = value;
      return true;
    }
  }
  return false;
}

void MetricsReport::mark_not_computable() {
  not_computable.clear();
  for (const auto& f : fields()) {
    if (f.applicable && !f.value) not_computable.insert(f.name);
  }
}

bool operator==(const MetricsReport& a, const MetricsReport& b) {
  if (a.record_id != b.record_id || a.n != b.n || a.m != b.m || a.freq.method != b.freq.method ||
      a.beats.detailed != b.beats.detailed || a.not_computable != b.not_computable) {
    return false;
  }
  const auto fa = a.fields();
  const auto fb = b.fields();
  for (std::size_t i = 0; i < fa.size(); ++i) {
    if (fa[i].value != fb[i].value) return false;
  }
  return true;
}

const std::vector<std::string>& report_metric_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    MetricsReport probe;
    probe.beats.detailed = true;
    for (const auto& f : probe.fields()) out.push_back(f.name);
    out.push_back("psd_method");
    return out;
  }();
  return names;
}

std::string plan_prefix(int n, int m) {
  return "hr" + std::to_string(n) + "v" + std::to_string(m) + "_";
}

}  // namespace hrnv
