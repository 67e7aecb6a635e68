#include "hrnv/transform.hpp"

#include <string>

namespace hrnv {

namespace {

void check_plan(int n, int m) {
  if (n < 1 || m < 1 || m > n) {
    throw Error(Errc::InvalidParameters,
                "need 1 <= m <= n, got n=" + std::to_string(n) + " m=" + std::to_string(m));
  }
}

}  // namespace

RnimSeries build_rrnim(const IbiSeries& ibi, int n, int m) {
  check_plan(n, m);
  RnimSeries out;
  out.n = n;
  out.m = m;
  out.source_len = ibi.size();
  out.values_ms = windowed_sums(ibi.intervals_ms, n, m);
  if (m == n) {
    out.times_ms = cumulative_sum(out.values_ms);
  } else {
    out.times_ms.resize(out.values_ms.size());
    for (Eigen::Index i = 0; i < out.values_ms.size(); ++i) {
      out.times_ms[i] = ibi.onset_times_ms[i * m];
    }
  }
  return out;
}

std::vector<Plan> enumerate_plans(PlanMode mode, int n, std::optional<int> m) {
  if (n < 1) throw Error(Errc::InvalidParameters, "n must be at least 1");
  switch (mode) {
    case PlanMode::single: {
      const int stride = m.value_or(n);
      check_plan(n, stride);
      return {{n, stride}};
    }
    case PlanMode::m_equals_n:
      return {{n, n}};
    case PlanMode::all: {
      std::vector<Plan> plans;
      for (int a = 1; a <= n; ++a) {
        for (int b = 1; b <= a; ++b) plans.push_back({a, b});
      }
      return plans;
    }
  }
  throw Error(Errc::InvalidParameters, "unknown plan mode");
}

}  // namespace hrnv
