#include "sweep/bdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sweep/errors.hpp"
#include "sweep/format.hpp"
#include "sweep/parallel.hpp"

namespace sweep {

namespace {

void require_bdp(const BdpParams& p) {
  if (!(p.b > 0.0) || !(p.d >= 0.0) || !std::isfinite(p.b) || !std::isfinite(p.d))
    throw ParameterError("birth-death rates need b > 0, d >= 0");
}

// (1 - rho^m) / (1 - rho^n) for rho = exp(log_rho) != 1, stable for large m, n.
double geometric_ratio(double log_rho, double m, double n) {
  if (log_rho < 0.0) return std::expm1(m * log_rho) / std::expm1(n * log_rho);
  return std::exp((m - n) * log_rho) * std::expm1(-m * log_rho) / std::expm1(-n * log_rho);
}

}  // namespace

double expected_size(const BdpParams& bdp, double i, double t) {
  if (!(i >= 0.0) || !(t >= 0.0)) throw ParameterError("i >= 0 and t >= 0");
  if (i == 0.0) return 0.0;
  return i * std::exp((bdp.b - bdp.d) * t);
}

double hitting_probability(const BdpParams& bdp, std::int64_t i, std::int64_t j, std::int64_t k) {
  require_bdp(bdp);
  if (!(i <= j && j <= k && i < k)) throw ParameterError("hitting_probability needs i <= j <= k and i < k");
  if (j == k) return 1.0;
  if (j == i) return 0.0;
  const auto m = static_cast<double>(j - i);
  const auto n = static_cast<double>(k - i);
  if (bdp.d == bdp.b) return m / n;
  if (bdp.d == 0.0) return 1.0;
  return geometric_ratio(std::log(bdp.d / bdp.b), m, n);
}

double extinction_cdf(const BdpParams& bdp, std::int64_t i, double t) {
  require_bdp(bdp);
  if (i < 0 || !(t >= 0.0)) throw ParameterError("i >= 0 and t >= 0");
  if (i == 0) return 1.0;
  if (t == 0.0 || bdp.d == 0.0) return 0.0;
  const double b = bdp.b, d = bdp.d;
  double single;
  if (b == d) {
    single = b * t / (1.0 + b * t);
  } else if (d < b) {
    const double e = std::exp((d - b) * t);
    single = d * (-std::expm1((d - b) * t)) / (b - d * e);
  } else {
    // Multiply through by exp((b - d) t) so that t -> infinity stays finite.
    const double e = std::exp((b - d) * t);
    single = d * (-std::expm1((b - d) * t)) / (d - b * e);
  }
  return std::pow(std::clamp(single, 0.0, 1.0), static_cast<double>(i));
}

double max_coupling_eps(const EcologyParams& params) {
  const DerivedEcology e = derived_ecology(params);
  return e.S_aA / (2.0 * params.C(1, 0) * params.C(0, 1) / params.C(0, 0) + params.C(1, 1));
}

CouplingRates coupling_rates(const EcologyParams& params, double eps) {
  params.validate();
  const DerivedEcology e = derived_ecology(params);
  if (!(e.S_aA > 0.0)) throw RegimeError("S_aA <= 0: the mutant does not invade");
  const double eps_max = max_coupling_eps(params);
  if (!(eps > 0.0) || !(eps < eps_max))
    throw ParameterError("eps must satisfy 0 < eps < S_aA / (2 C_aA C_Aa / C_AA + C_aa) = " + format_double(eps_max));
  const double f_a = params.f_a, C_AA = params.C(0, 0), C_Aa = params.C(0, 1), C_aA = params.C(1, 0),
               C_aa = params.C(1, 1);
  CouplingRates c;
  c.eps = eps;
  c.s_minus = e.S_aA / f_a - eps * (2.0 * C_aA * C_Aa + C_aa * C_AA) / (f_a * C_AA);
  c.s_plus = e.S_aA / f_a + 2.0 * eps * C_aA * C_Aa / (f_a * C_AA);
  if (!(c.s_plus < 1.0)) throw ParameterError("s_plus(eps) < 1 fails: eps too large for these parameters");
  return c;
}

double q_ratio(double s1, double s2, std::int64_t j, std::int64_t k, std::int64_t M) {
  if (!(s1 > 0.0 && s1 < 1.0 && s2 > 0.0 && s2 < 1.0)) throw ParameterError("0 < s1, s2 < 1");
  if (!(0 <= j && j <= k && k < M)) throw ParameterError("0 <= j <= k < M");
  const double l1 = std::log1p(-s1), l2 = std::log1p(-s2);
  const auto pw = [](double log_base, std::int64_t n) { return -std::expm1(static_cast<double>(n) * log_base); };
  return s1 / pw(l1, M - k) * pw(l2, M - j) / pw(l2, k + 1 - j);
}

namespace {

struct CoupledPath {
  bool violated = false;
  std::int64_t checks = 0;
  bool N_hit = false;
  bool minus_hit_coupled = false;
  bool plus_hit = false;
  bool minus_hit = false;
};

// Continues a single birth-death process alone until it hits 0 or M.
bool continue_to_threshold(std::int64_t z, double b, double d, std::int64_t M, Rng& rng) {
  while (z > 0 && z < M) z += rng.uniform() * (b + d) < b ? 1 : -1;
  return z >= M;
}

CoupledPath coupled_path(const EcologyParams& p, const ScalingParams& s, const CouplingRates& rates, Rng& rng) {
  const double K = static_cast<double>(s.K);
  const std::int64_t M = mutant_threshold(s.K, rates.eps);
  const ResidentBand band = resident_band(p, s.K, rates.eps);
  const PopState init = hard_sweep_initial(p, s.K, 0.5);
  std::int64_t nA = init.n_A(), na = init.n_a(), zm = 1, zp = 1;
  const double death_m = p.f_a * (1.0 - rates.s_minus);
  const double death_p = p.f_a * (1.0 - rates.s_plus);
  CoupledPath out;
  for (;;) {
    ++out.checks;
    if (!(zm <= na && na <= zp)) {
      out.violated = true;
      break;
    }
    if (zm >= M) out.minus_hit_coupled = true;
    if (na >= M) {
      out.N_hit = true;
      break;
    }
    if (na == 0 || !band.contains(nA)) break;
    const double birth_max = p.f_a * static_cast<double>(std::max({zm, na, zp}));
    const double dN = (p.D_a + (p.C(1, 0) * nA + p.C(1, 1) * na) / K) * na;
    const double dzm = death_m * zm, dzp = death_p * zp;
    const double death_max = std::max({dzm, dN, dzp});
    const double bA = p.f_A * nA;
    const double dA = (p.D_A + (p.C(0, 0) * nA + p.C(0, 1) * na) / K) * nA;
    const double total = birth_max + death_max + bA + dA;
    double u = rng.uniform() * total;
    if (u < birth_max) {
      // Nested thinning: a birth of the smaller process implies one of the larger.
      if (u < p.f_a * zm) ++zm;
      if (u < p.f_a * na) ++na;
      if (u < p.f_a * zp) ++zp;
    } else if ((u -= birth_max) < death_max) {
      if (u < dzm) --zm;
      if (u < dN) --na;
      if (u < dzp) --zp;
    } else if ((u -= death_max) < bA) {
      ++nA;
    } else {
      --nA;
    }
  }
  out.plus_hit = zp >= M || continue_to_threshold(zp, p.f_a, death_p, M, rng);
  out.minus_hit = zm >= M || continue_to_threshold(zm, p.f_a, death_m, M, rng);
  return out;
}

}  // namespace

SandwichReport sandwich_check(const EcologyParams& params, const ScalingParams& scaling, double eps,
                              std::int64_t n_replicates, std::uint64_t seed_base, unsigned workers) {
  params.validate();
  scaling.validate();
  if (n_replicates < 1) throw ParameterError("n_replicates >= 1");
  SandwichReport rep;
  rep.rates = coupling_rates(params, eps);
  const std::int64_t M = mutant_threshold(scaling.K, eps);
  if (M < 2) throw ParameterError("floor(eps K) >= 2");
  rep.n_replicates = n_replicates;
  std::vector<CoupledPath> paths(static_cast<std::size_t>(n_replicates));
  parallel_for_index(paths.size(), workers, [&](std::size_t i) {
    Rng rng(replicate_seed(seed_base, i));
    paths[i] = coupled_path(params, scaling, rep.rates, rng);
  });
  for (const auto& c : paths) {
    rep.n_events_checked += c.checks;
    if (c.violated) ++rep.n_violating_replicates;
    if ((c.minus_hit_coupled && !c.N_hit) || (c.N_hit && !c.plus_hit)) ++rep.n_inclusion_violations;
    rep.n_N_hit += c.N_hit;
    rep.n_plus_hit += c.plus_hit;
    rep.n_minus_hit += c.minus_hit;
    rep.n_minus_hit_coupled += c.minus_hit_coupled;
  }
  rep.p_plus_hit = hitting_probability({params.f_a, params.f_a * (1.0 - rep.rates.s_plus)}, 0, 1, M);
  rep.p_minus_hit = hitting_probability({params.f_a, params.f_a * (1.0 - rep.rates.s_minus)}, 0, 1, M);
  return rep;
}

BdpRun simulate_bdp(const BdpParams& bdp, std::int64_t i0, std::int64_t lower, std::int64_t upper, Rng& rng,
                    double t_max) {
  require_bdp(bdp);
  if (!(lower <= i0 && i0 <= upper)) throw ParameterError("lower <= i0 <= upper");
  std::int64_t z = i0;
  double t = 0.0;
  for (;;) {
    if (z == lower) return {BdpExit::Lower, t};
    if (z == upper) return {BdpExit::Upper, t};
    const double total = (bdp.b + bdp.d) * static_cast<double>(z);
    const double dt = rng.exponential(total);
    if (t + dt > t_max) return {BdpExit::TimeLimit, t_max};
    t += dt;
    z += rng.uniform() * (bdp.b + bdp.d) < bdp.b ? 1 : -1;
  }
}

}  // namespace sweep
