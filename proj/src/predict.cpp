#include "sweep/predict.hpp"

#include <cmath>

#include "sweep/dynsys.hpp"
#include "sweep/errors.hpp"

namespace sweep {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Soft: return "soft";
    case Regime::HardStrong: return "hard-strong";
    case Regime::HardWeak: return "hard-weak";
  }
  return "unknown";
}

double rho_K(const EcologyParams& params, double r_K, std::int64_t K) {
  const DerivedEcology e = derived_ecology(params);
  if (!(e.S_aA > 0.0)) throw RegimeError("S_aA <= 0: the mutant does not invade");
  if (!(r_K >= 0.0 && r_K <= 1.0)) throw ParameterError("r_K in [0, 1]");
  if (K < 2) throw ParameterError("K >= 2");
  return -std::expm1(-params.f_a * r_K * std::log(static_cast<double>(K)) / e.S_aA);
}

SweepPrediction predict_soft(const EcologyParams& params, double r, const Vec4& z, double tol) {
  params.validate();
  const DerivedEcology e = derived_ecology(params);
  if (!e.assumption1_ok) throw RegimeError("Assumption 1 (nbar_A > 0, nbar_a > 0, S_Aa < 0 < S_aA) does not hold");
  const double z_A = z(0) + z(1), z_a = z(2) + z(3);
  if (!(z_a > 0.0)) throw ParameterError("soft sweep needs z_a > 0");
  const double p_a = z(2) / z_a;
  SweepPrediction out;
  out.regime = Regime::Soft;
  out.fixation_prob = 1.0;
  if (z_A == 0.0) {
    out.F_limit = 0.0;
    out.p_ab1_limit = p_a;
    return out;
  }
  const double p_A = z(0) / z_A;
  const double F = compute_F_limit(params, r, z, tol).value;
  out.F_limit = F;
  out.p_ab1_limit = p_A * F + p_a * (1.0 - F);
  return out;
}

SweepPrediction predict_hard(const EcologyParams& params, double r_K, std::int64_t K, double z_Ab1_frac,
                             Regime regime) {
  params.validate();
  const DerivedEcology e = derived_ecology(params);
  if (!e.assumption1_ok) throw RegimeError("Assumption 1 (nbar_A > 0, nbar_a > 0, S_Aa < 0 < S_aA) does not hold");
  if (!(z_Ab1_frac >= 0.0 && z_Ab1_frac <= 1.0)) throw ParameterError("z_Ab1_frac in [0, 1]");
  if (regime == Regime::Soft) throw RegimeError("predict_hard needs a hard-sweep regime");
  SweepPrediction out;
  out.regime = regime;
  out.fixation_prob = e.S_aA / params.f_a;
  out.r_log_K = r_K * std::log(static_cast<double>(K));
  if (regime == Regime::HardStrong) {
    out.p_ab1_limit = z_Ab1_frac;
  } else {
    const double rho = rho_K(params, r_K, K);
    out.rho_K = rho;
    out.p_ab1_limit = (1.0 - rho) + rho * z_Ab1_frac;
  }
  return out;
}

}  // namespace sweep
