#include "sweep/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sweep/errors.hpp"

namespace sweep {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void EcologyParams::validate() const {
  require(std::isfinite(f_A) && f_A > 0.0, "f_A > 0");
  require(std::isfinite(f_a) && f_a > 0.0, "f_a > 0");
  require(finite_nonneg(D_A), "D_A >= 0");
  require(finite_nonneg(D_a), "D_a >= 0");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) require(finite_nonneg(C(i, j)), "C[" + std::to_string(i) + "][" + std::to_string(j) + "] >= 0");
  require(C(0, 0) > 0.0, "C_AA > 0");
  require(C(1, 1) > 0.0, "C_aa > 0");
}

void ScalingParams::validate() const {
  require(K >= 1, "K >= 1");
  require(std::isfinite(r_K) && r_K >= 0.0 && r_K <= 1.0, "0 <= r_K <= 1");
}

std::int64_t& PopState::operator[](int type) {
  switch (type) {
    case 0: return n_Ab1;
    case 1: return n_Ab2;
    case 2: return n_ab1;
    default: return n_ab2;
  }
}

std::int64_t PopState::operator[](int type) const {
  switch (type) {
    case 0: return n_Ab1;
    case 1: return n_Ab2;
    case 2: return n_ab1;
    default: return n_ab2;
  }
}

Vec4 death_rates(const EcologyParams& params, const ScalingParams& scaling, const PopState& state) {
  return death_rate_vector(params, static_cast<double>(scaling.K), state.as_vector());
}

Vec4 birth_rates(const EcologyParams& params, const ScalingParams& scaling, const PopState& state) {
  return birth_rate_vector(params, scaling.r_K, state.as_vector());
}

DerivedEcology derived_ecology(const EcologyParams& params) {
  if (!(params.C(0, 0) > 0.0) || !(params.C(1, 1) > 0.0))
    throw ParameterError("diagonal competition C_AA, C_aa must be > 0");
  DerivedEcology e;
  e.nbar_A = (params.f_A - params.D_A) / params.C(0, 0);
  e.nbar_a = (params.f_a - params.D_a) / params.C(1, 1);
  e.S_aA = params.f_a - params.D_a - params.C(1, 0) * e.nbar_A;
  e.S_Aa = params.f_A - params.D_A - params.C(0, 1) * e.nbar_a;
  e.assumption1_ok = e.nbar_A > 0.0 && e.nbar_a > 0.0 && e.S_Aa < 0.0 && 0.0 < e.S_aA;
  return e;
}

bool assumption1_raw(const EcologyParams& p) {
  const double gA = p.f_A - p.D_A;
  const double ga = p.f_a - p.D_a;
  if (!(gA > 0.0) || !(ga > 0.0)) return false;
  const double r1 = p.C(1, 0) / p.C(0, 0);
  // C_Aa = 0 makes the second ratio infinite: A always invades back.
  if (!(p.C(0, 1) > 0.0)) return false;
  const double r2 = p.C(1, 1) / p.C(0, 1);
  return ga > gA * std::max(r1, r2);
}

double linkage_disequilibrium(const PopState& s) {
  return static_cast<double>(s.n_ab2) * static_cast<double>(s.n_Ab1) -
         static_cast<double>(s.n_ab1) * static_cast<double>(s.n_Ab2);
}

ResidentBand resident_band(const EcologyParams& params, std::int64_t K, double eps) {
  const DerivedEcology e = derived_ecology(params);
  const double half_width = 2.0 * eps * params.C(0, 1) / params.C(0, 0);
  const auto k = static_cast<double>(K);
  return {k * (e.nbar_A - half_width), k * (e.nbar_A + half_width)};
}

std::int64_t mutant_threshold(std::int64_t K, double eps) {
  return static_cast<std::int64_t>(std::floor(eps * static_cast<double>(K)));
}

PopState hard_sweep_initial(const EcologyParams& params, std::int64_t K, double z_Ab1_frac) {
  if (!(z_Ab1_frac >= 0.0 && z_Ab1_frac <= 1.0)) throw ParameterError("z_Ab1_frac in [0, 1]");
  const DerivedEcology e = derived_ecology(params);
  if (!(e.nbar_A > 0.0)) throw ParameterError("hard sweep needs nbar_A > 0");
  const double z_Ab1 = z_Ab1_frac * e.nbar_A;
  const auto k = static_cast<double>(K);
  PopState s;
  s.n_Ab1 = static_cast<std::int64_t>(std::floor(z_Ab1 * k));
  s.n_Ab2 = static_cast<std::int64_t>(std::floor((e.nbar_A - z_Ab1) * k));
  s.n_ab1 = 1;
  s.n_ab2 = 0;
  return s;
}

PopState scaled_initial(const Vec4& z, std::int64_t K) {
  PopState s;
  for (int i = 0; i < 4; ++i) {
    if (!(z(i) >= 0.0) || !std::isfinite(z(i))) throw ParameterError("initial densities must be finite and >= 0");
    s[i] = static_cast<std::int64_t>(std::floor(z(i) * static_cast<double>(K)));
  }
  return s;
}

}  // namespace sweep
