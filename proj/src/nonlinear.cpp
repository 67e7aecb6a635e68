#include "hrnv/nonlinear.hpp"

#include <algorithm>

namespace hrnv {

void EntropyConfig::validate() const {
  if (embedding < 1) throw Error(Errc::InvalidConfig, "entropy embedding must be at least 1");
  if (!(tolerance_factor > 0.0)) throw Error(Errc::InvalidConfig, "tolerance factor must be positive");
}

DfaExponents dfa(const Eigen::VectorXd& x, const DfaConfig& cfg) {
  DfaExponents out;
  const Eigen::Index n = x.size();
  if (n >= cfg.alpha1_min_length) out.alpha1 = dfa_exponent(x, cfg.alpha1_min, cfg.alpha1_max);
  if (n >= cfg.alpha2_min_length) {
    const Eigen::Index upper = std::min<Eigen::Index>(cfg.alpha2_max, n / 4);
    out.alpha2 = dfa_exponent(x, cfg.alpha2_min, upper);
  }
  return out;
}

double entropy_tolerance(const Eigen::VectorXd& x, const EntropyConfig& cfg) {
  return cfg.tolerance_factor * sample_std(x);
}

NonlinearMetrics compute_nonlinear(const Eigen::VectorXd& values_ms, const EntropyConfig& entropy,
                                   const DfaConfig& dfa_cfg) {
  entropy.validate();
  NonlinearMetrics out;
  const Eigen::Index n = values_ms.size();
  if (n >= 3) {
    const auto pc = poincare(values_ms);
    out.sd1_ms = pc.sd1;
    out.sd2_ms = pc.sd2;
  }
  if (n > entropy.embedding + 1) {
    const double r = entropy_tolerance(values_ms, entropy);
    out.apen = approximate_entropy(values_ms, entropy.embedding, r);
    out.sampen = sample_entropy(values_ms, entropy.embedding, r);
  }
  const auto exponents = dfa(values_ms, dfa_cfg);
  out.dfa_alpha1 = exponents.alpha1;
  out.dfa_alpha2 = exponents.alpha2;
  return out;
}

NonlinearMetrics compute_nonlinear(const RnimSeries& series, const EntropyConfig& entropy,
                                   const DfaConfig& dfa_cfg) {
  return compute_nonlinear(series.values_ms, entropy, dfa_cfg);
}

}  // namespace hrnv
