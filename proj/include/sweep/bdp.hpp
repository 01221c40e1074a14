#pragma once

#include <cstdint>
#include <limits>

#include "sweep/model.hpp"
#include "sweep/rng.hpp"

namespace sweep {

/// Linear birth-death process with per-capita rates b and d.
struct BdpParams {
  double b = 1.0;
  double d = 0.0;
};

/// E_i[Z_t] = i exp((b - d) t).
double expected_size(const BdpParams& bdp, double i, double t);

/// P_j(T_k < T_i) for i <= j <= k, i < k. The critical case b = d uses the
/// (j - i) / (k - i) limit.
double hitting_probability(const BdpParams& bdp, std::int64_t i, std::int64_t j, std::int64_t k);

/// P_i(T_0 <= t). The critical case uses (b t / (1 + b t))^i.
double extinction_cdf(const BdpParams& bdp, std::int64_t i, double t);

struct CouplingRates {
  double s_minus = 0.0;
  double s_plus = 0.0;
  double eps = 0.0;
};

/// Largest eps (exclusive) for which s_minus(eps) > 0.
double max_coupling_eps(const EcologyParams& params);

/// Rates of the two birth-death processes that bound N_a during the first
/// phase: birth f_a, death f_a (1 - s_minus) and f_a (1 - s_plus).
CouplingRates coupling_rates(const EcologyParams& params, double eps);

/// q_{j,k}^{(s1,s2)} with M = floor(eps K).
double q_ratio(double s1, double s2, std::int64_t j, std::int64_t k, std::int64_t M);

struct SandwichReport {
  std::int64_t n_replicates = 0;
  std::int64_t n_violating_replicates = 0;  ///< Z- <= N_a <= Z+ failed at some event
  std::int64_t n_events_checked = 0;
  std::int64_t n_inclusion_violations = 0;  ///< pathwise hitting-order violations
  std::int64_t n_N_hit = 0;                 ///< T_eps reached before S_eps
  std::int64_t n_plus_hit = 0;              ///< Z+ reaches floor(eps K)
  std::int64_t n_minus_hit = 0;             ///< Z- reaches floor(eps K)
  std::int64_t n_minus_hit_coupled = 0;     ///< ... before the coupling ends
  double p_plus_hit = 0.0;                  ///< analytic P_1(Z+ hits floor(eps K) before 0)
  double p_minus_hit = 0.0;
  CouplingRates rates;
};

/// Runs coupled triples (Z-, N, Z+) from the hard-sweep start on one event
/// stream with nested thinning, and checks the pathwise ordering at every
/// event before T_eps ^ S_eps.
SandwichReport sandwich_check(const EcologyParams& params, const ScalingParams& scaling, double eps,
                              std::int64_t n_replicates, std::uint64_t seed_base, unsigned workers = 1);

enum class BdpExit { Lower, Upper, TimeLimit };

struct BdpRun {
  BdpExit exit = BdpExit::TimeLimit;
  double time = 0.0;
};

/// Simulates Z from i0 until it hits `lower` or `upper`, or time t_max.
BdpRun simulate_bdp(const BdpParams& bdp, std::int64_t i0, std::int64_t lower, std::int64_t upper, Rng& rng,
                    double t_max = std::numeric_limits<double>::infinity());

}  // namespace sweep
