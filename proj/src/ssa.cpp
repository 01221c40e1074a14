#include "sweep/ssa.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "sweep/errors.hpp"
#include "sweep/format.hpp"
#include "sweep/parallel.hpp"

namespace sweep {

void SimConfig::validate(std::int64_t K) const {
  if (max_events < 1) throw ParameterError("max_events >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon in (0, 1)");
  if (mutant_threshold(K, epsilon) < 1) throw ParameterError("floor(epsilon * K) >= 1");
  if (record_mode == RecordMode::Sampled && !(sample_dt > 0.0)) throw ParameterError("sample_dt > 0 for sampled trajectories");
  if (t_end && !(*t_end >= 0.0)) throw ParameterError("t_end >= 0");
  for (int i = 0; i < 4; ++i)
    if (initial_state[i] < 0) throw ParameterError("initial counts >= 0");
}

const char* to_string(SweepStatus s) {
  switch (s) {
    case SweepStatus::Fixed: return "fixed";
    case SweepStatus::Lost: return "lost";
    case SweepStatus::BothExtinct: return "both_extinct";
    case SweepStatus::Truncated: return "truncated";
    case SweepStatus::TimeLimit: return "time_limit";
    case SweepStatus::EpsHit: return "eps_hit";
    case SweepStatus::Stopped: return "stopped";
  }
  return "unknown";
}

SweepRun run_sweep(const EcologyParams& params, const ScalingParams& scaling, const SimConfig& config) {
  return run_sweep_observed(params, scaling, config, detail::NoObserver{});
}

FixationEstimate fixation_frequency(const EcologyParams& params, const ScalingParams& scaling,
                                    const PopState& initial, std::int64_t n_replicates, std::uint64_t seed_base,
                                    double epsilon, std::int64_t max_events, unsigned workers) {
  if (n_replicates < 1) throw ParameterError("n_replicates >= 1");
  FixationEstimate est;
  est.n_attempted = n_replicates;
  est.outcomes.resize(static_cast<std::size_t>(n_replicates));
  parallel_for_index(est.outcomes.size(), workers, [&](std::size_t i) {
    SimConfig cfg;
    cfg.initial_state = initial;
    cfg.seed = replicate_seed(seed_base, i);
    cfg.epsilon = epsilon;
    cfg.max_events = max_events;
    est.outcomes[i] = run_sweep(params, scaling, cfg).outcome;
  });
  for (const auto& o : est.outcomes) {
    if (o.truncated()) {
      ++est.n_truncated;
      continue;
    }
    ++est.n_valid;
    if (o.fixed) ++est.n_fixed;
  }
  est.estimate = est.n_valid > 0 ? static_cast<double>(est.n_fixed) / static_cast<double>(est.n_valid) : std::nan("");
  est.ci = wilson_interval(est.n_fixed, est.n_valid);
  return est;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& trajectory) {
  os << "t,n_Ab1,n_Ab2,n_ab1,n_ab2\n";
  for (const auto& p : trajectory) {
    os << format_double(p.t) << ',' << p.state.n_Ab1 << ',' << p.state.n_Ab2 << ',' << p.state.n_ab1 << ','
       << p.state.n_ab2 << '\n';
  }
}

}  // namespace sweep
