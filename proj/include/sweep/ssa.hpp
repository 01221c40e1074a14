#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sweep/model.hpp"
#include "sweep/rng.hpp"
#include "sweep/stats.hpp"

namespace sweep {

enum class RecordMode { OutcomeOnly, Sampled, FullEvents };

struct SimConfig {
  PopState initial_state;
  std::uint64_t seed = 0;
  std::int64_t max_events = 500'000'000;
  double epsilon = 0.1;
  RecordMode record_mode = RecordMode::OutcomeOnly;
  double sample_dt = 0.0;  ///< grid spacing for RecordMode::Sampled
  /// When set, absorption of the A-population does not stop the run; the
  /// chain runs to t_end (or until empty). Stopping times are still recorded.
  std::optional<double> t_end;
  /// Stop as soon as N_a first equals floor(eps K).
  bool stop_at_eps_hit = false;

  void validate(std::int64_t K) const;
};

enum class SweepStatus {
  Fixed,        ///< N_A hit 0 with N_a > 0
  Lost,         ///< N_a hit 0 before N_A did
  BothExtinct,  ///< empty population, total rate zero
  Truncated,    ///< max_events reached before absorption
  TimeLimit,    ///< t_end reached
  EpsHit,       ///< stopped at T_eps (stop_at_eps_hit)
  Stopped,      ///< observer requested stop
};

const char* to_string(SweepStatus s);

struct SweepOutcome {
  SweepStatus status = SweepStatus::BothExtinct;
  bool fixed = false;
  std::optional<double> t_ext;
  std::optional<double> p_ab1_final;  ///< P_{a,b1}(T_ext); present iff fixed
  std::int64_t n_a_final = 0;
  std::optional<double> t_eps_hit;
  std::optional<double> s_eps_exit;
  std::int64_t events_used = 0;
  double t_final = 0.0;
  PopState final_state;

  bool truncated() const { return status == SweepStatus::Truncated; }
};

struct TrajectoryPoint {
  double t = 0.0;
  PopState state;
};

struct SweepRun {
  SweepOutcome outcome;
  std::vector<TrajectoryPoint> trajectory;
};

/// Channels 0..3 are births of genotype i, 4..7 deaths of genotype i - 4.
struct EventDraw {
  double dt = 0.0;
  int channel = -1;
  Vec4 births = Vec4::Zero();
  Vec4 deaths = Vec4::Zero();
};

constexpr bool is_birth(int channel) { return channel < 4; }
constexpr int channel_type(int channel) { return channel & 3; }

/// One step of the direct method: exponential holding time with the total
/// rate, then a single uniform inverted over the eight cumulative rates.
/// Returns false (leaving draw untouched) when the total rate is zero.
inline bool draw_event(const EcologyParams& p, const ScalingParams& s, const PopState& state, Rng& rng,
                       EventDraw& draw) {
  const Vec4 n = state.as_vector();
  draw.births = birth_rate_vector(p, s.r_K, n);
  draw.deaths = death_rate_vector(p, static_cast<double>(s.K), n);
  const double total = draw.births.sum() + draw.deaths.sum();
  if (!(total > 0.0)) return false;
  draw.dt = rng.exponential(total);
  const double u = rng.uniform() * total;
  double cum = 0.0;
  int last_positive = -1;
  for (int c = 0; c < 8; ++c) {
    const double rate = c < 4 ? draw.births(c) : draw.deaths(c - 4);
    if (rate <= 0.0) continue;
    last_positive = c;
    cum += rate;
    if (u < cum) {
      draw.channel = c;
      return true;
    }
  }
  draw.channel = last_positive;  // u rounded onto the upper edge
  return true;
}

inline void apply_event(PopState& state, int channel) { state[channel_type(channel)] += is_birth(channel) ? 1 : -1; }

namespace detail {

struct NoObserver {
  bool operator()(double, const PopState&, const PopState&, int) const { return true; }
};

}  // namespace detail

/// Exact simulation of the four-type jump process. The observer is called
/// after every event as obs(t, before, after, channel) and may return false
/// to stop the run.
template <typename Observer>
SweepRun run_sweep_observed(const EcologyParams& params, const ScalingParams& scaling, const SimConfig& config,
                            Observer&& observer) {
  params.validate();
  scaling.validate();
  config.validate(scaling.K);

  SweepRun run;
  SweepOutcome& out = run.outcome;
  PopState state = config.initial_state;
  const ResidentBand band = resident_band(params, scaling.K, config.epsilon);
  const std::int64_t threshold = mutant_threshold(scaling.K, config.epsilon);
  const bool sampled = config.record_mode == RecordMode::Sampled;
  const bool full = config.record_mode == RecordMode::FullEvents;
  Rng rng(config.seed);
  double t = 0.0;
  double next_sample = 0.0;

  auto emit_samples_before = [&](double t_next, bool inclusive) {
    if (!sampled) return;
    while (inclusive ? next_sample <= t_next : next_sample < t_next) {
      run.trajectory.push_back({next_sample, state});
      next_sample += config.sample_dt;
    }
  };
  auto finish = [&](SweepStatus status) {
    out.status = status;
    out.t_final = t;
    out.final_state = state;
    out.n_a_final = state.n_a();
    return run;
  };
  auto on_A_extinct = [&] {
    out.t_ext = t;
    if (state.n_a() > 0) {
      out.fixed = true;
      out.p_ab1_final = static_cast<double>(state.n_ab1) / static_cast<double>(state.n_a());
    }
  };

  if (full) run.trajectory.push_back({0.0, state});
  if (threshold >= 1 && state.n_a() == threshold) out.t_eps_hit = 0.0;
  if (!band.contains(state.n_A())) out.s_eps_exit = 0.0;
  if (state.total() == 0) return finish(SweepStatus::BothExtinct);
  if (state.n_A() == 0) {
    on_A_extinct();
    if (!config.t_end) return finish(SweepStatus::Fixed);
  } else if (state.n_a() == 0 && !config.t_end) {
    return finish(SweepStatus::Lost);
  }
  if (config.stop_at_eps_hit && out.t_eps_hit) return finish(SweepStatus::EpsHit);

  EventDraw draw;
  for (;;) {
    if (out.events_used >= config.max_events) return finish(SweepStatus::Truncated);
    if (!draw_event(params, scaling, state, rng, draw)) {
      if (config.t_end) emit_samples_before(*config.t_end, true);
      return finish(SweepStatus::BothExtinct);
    }
    const double t_next = t + draw.dt;
    if (config.t_end && t_next > *config.t_end) {
      emit_samples_before(*config.t_end, true);
      t = *config.t_end;
      return finish(SweepStatus::TimeLimit);
    }
    emit_samples_before(t_next, false);
    const PopState before = state;
    apply_event(state, draw.channel);
    t = t_next;
    ++out.events_used;
    if (full) run.trajectory.push_back({t, state});

    if (!out.t_eps_hit && state.n_a() == threshold && threshold >= 1) out.t_eps_hit = t;
    if (!out.s_eps_exit && !band.contains(state.n_A())) out.s_eps_exit = t;
    if (!observer(t, before, state, draw.channel)) return finish(SweepStatus::Stopped);
    if (config.stop_at_eps_hit && out.t_eps_hit) return finish(SweepStatus::EpsHit);

    if (state.n_A() == 0 && before.n_A() > 0 && !out.t_ext) {
      on_A_extinct();
      if (!config.t_end) return finish(SweepStatus::Fixed);
    }
    if (state.n_a() == 0 && !config.t_end && !out.t_ext) return finish(SweepStatus::Lost);
  }
}

SweepRun run_sweep(const EcologyParams& params, const ScalingParams& scaling, const SimConfig& config);

struct FixationEstimate {
  std::int64_t n_attempted = 0;
  std::int64_t n_valid = 0;  ///< attempted minus truncated
  std::int64_t n_fixed = 0;
  std::int64_t n_truncated = 0;
  double estimate = 0.0;
  Interval ci;
  std::vector<SweepOutcome> outcomes;  ///< indexed by replicate
};

/// Fraction of fixing replicates among n_replicates independent seeded
/// sweeps from `initial`, with a 95% Wilson interval. Truncated replicates
/// are excluded from the estimate and counted.
FixationEstimate fixation_frequency(const EcologyParams& params, const ScalingParams& scaling,
                                    const PopState& initial, std::int64_t n_replicates, std::uint64_t seed_base,
                                    double epsilon = 0.1, std::int64_t max_events = 500'000'000,
                                    unsigned workers = 1);

/// CSV with header t,n_Ab1,n_Ab2,n_ab1,n_ab2 and round-trip precision times.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& trajectory);

}  // namespace sweep
