#include "sweep/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <vector>

#include "sweep/bdp.hpp"
#include "sweep/errors.hpp"
#include "sweep/format.hpp"
#include "sweep/genealogy.hpp"
#include "sweep/parallel.hpp"
#include "sweep/predict.hpp"
#include "sweep/ssa.hpp"
#include "sweep/stats.hpp"

namespace sweep {

using nlohmann::json;

namespace {

constexpr std::uint64_t kBootstrapTag = 0xb0075;

struct Sinks {
  std::ostream* replicates = nullptr;
  std::vector<std::ostream*> origins;  ///< one per cell, or empty
};

json interval_json(const Interval& ci) { return json::array({ci.lo, ci.hi}); }

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string opt_csv(const std::optional<double>& x) { return x ? format_double(*x) : std::string("nan"); }

// Mean and bootstrap interval of xs, or nulls when xs is empty.
void mean_fields(json& cell, const char* mean_key, const char* ci_key, const std::vector<double>& xs,
                 std::uint64_t seed) {
  if (xs.empty()) {
    cell[mean_key] = nullptr;
    cell[ci_key] = nullptr;
    return;
  }
  cell[mean_key] = mean(xs);
  cell[ci_key] = interval_json(bootstrap_mean_ci(xs, seed));
}

std::optional<double> gap_of(const json& cell, const char* mean_key, const std::optional<double>& predicted) {
  if (!predicted || cell[mean_key].is_null()) return std::nullopt;
  return std::abs(cell[mean_key].get<double>() - *predicted);
}

// A gap breaches when a tolerance is configured and the gap is missing or larger.
bool breaches(const std::optional<double>& tol, const std::optional<double>& gap) {
  return tol && (!gap || *gap > *tol);
}

bool is_degraded(std::int64_t n_truncated, std::int64_t n) { return 100 * n_truncated > n; }

void outcome_csv(std::ostream& os, std::size_t cell, const ScalingParams& sc, std::size_t i,
                 const SweepOutcome& o) {
  os << cell << ',' << sc.K << ',' << format_double(sc.r_K) << ',' << i << ',' << to_string(o.status) << ','
     << (o.fixed ? 1 : 0) << ',' << opt_csv(o.t_ext) << ',' << opt_csv(o.p_ab1_final) << ',' << o.n_a_final << ','
     << opt_csv(o.t_eps_hit) << ',' << opt_csv(o.s_eps_exit) << ',' << o.events_used;
}

constexpr const char* kOutcomeHeader =
    "cell,K,r_K,replicate,status,fixed,t_ext,p_ab1_final,n_a_final,t_eps_hit,s_eps_exit,events_used";

struct CellResult {
  json cell;
  bool breach = false;
  bool degraded = false;
};

// Fixation and P_ab1 fields shared by the sweep scenarios.
void sweep_fields(CellResult& res, const std::vector<SweepOutcome>& outcomes, std::uint64_t seed) {
  std::int64_t n_fixed = 0, n_trunc = 0;
  std::vector<double> p;
  for (const SweepOutcome& o : outcomes) {
    if (o.truncated()) ++n_trunc;
    if (o.fixed) {
      ++n_fixed;
      p.push_back(*o.p_ab1_final);
    }
  }
  const auto n = static_cast<std::int64_t>(outcomes.size());
  const std::int64_t n_valid = n - n_trunc;
  json& c = res.cell;
  c["n"] = n;
  c["n_valid"] = n_valid;
  c["n_truncated"] = n_trunc;
  c["n_fixed"] = n_fixed;
  if (n_valid > 0) {
    c["fix_frac"] = static_cast<double>(n_fixed) / static_cast<double>(n_valid);
    c["fix_ci"] = interval_json(wilson_interval(n_fixed, n_valid));
  } else {
    c["fix_frac"] = nullptr;
    c["fix_ci"] = nullptr;
  }
  mean_fields(c, "mean_p_ab1", "p_ci", p, stream_seed(seed, kBootstrapTag));
  res.degraded = is_degraded(n_trunc, n);
}

void prediction_fields(CellResult& res, const ExperimentSpec& spec, const std::optional<SweepPrediction>& pred) {
  json& c = res.cell;
  c["predicted"] = pred ? json(pred->p_ab1_limit) : json(nullptr);
  c["predicted_fix"] = pred ? json(pred->fixation_prob) : json(nullptr);
  if (pred && pred->rho_K) c["rho_K"] = *pred->rho_K;
  if (pred && pred->F_limit) c["F_limit"] = *pred->F_limit;
  if (pred && pred->r_log_K) c["r_log_K"] = *pred->r_log_K;
  const auto gap = gap_of(c, "mean_p_ab1", pred ? std::optional(pred->p_ab1_limit) : std::nullopt);
  c["gap"] = opt(gap);
  const auto fix_gap = gap_of(c, "fix_frac", pred ? std::optional(pred->fixation_prob) : std::nullopt);
  c["fix_gap"] = opt(fix_gap);
  if (pred) res.breach = breaches(spec.tolerance, gap) || breaches(spec.fix_tolerance, fix_gap);
}

CellResult run_sweep_cell(const ExperimentSpec& spec, std::size_t idx, const ScalingParams& sc, unsigned workers,
                          Sinks& sinks) {
  const std::uint64_t seed = experiment_cell_seed(spec, idx);
  const PopState initial = spec.scenario == Scenario::Soft
                               ? scaled_initial(*spec.z, sc.K)
                               : hard_sweep_initial(spec.params, sc.K, *spec.z_Ab1_frac);
  const FixationEstimate est = fixation_frequency(spec.params, sc, initial, spec.n_replicates, seed, spec.epsilon,
                                                  spec.max_events, workers);
  CellResult res;
  sweep_fields(res, est.outcomes, seed);
  const SweepPrediction pred =
      spec.scenario == Scenario::Soft ? predict_soft(spec.params, sc.r_K, *spec.z)
                                      : predict_hard(spec.params, sc.r_K, sc.K, *spec.z_Ab1_frac, *spec.regime);
  prediction_fields(res, spec, pred);
  if (sinks.replicates) {
    for (std::size_t i = 0; i < est.outcomes.size(); ++i) {
      outcome_csv(*sinks.replicates, idx, sc, i, est.outcomes[i]);
      *sinks.replicates << '\n';
    }
  }
  return res;
}

CellResult run_genealogy_cell(const ExperimentSpec& spec, std::size_t idx, const ScalingParams& sc,
                              unsigned workers, Sinks& sinks) {
  const std::uint64_t seed = experiment_cell_seed(spec, idx);
  TaggedConfig base;
  base.z_Ab1_frac = *spec.z_Ab1_frac;
  base.epsilon = spec.epsilon;
  base.max_events = spec.max_events;
  base.run_to_extinction = true;
  const auto rows = run_tagged_batch(spec.params, sc, base, spec.n_replicates, seed, workers);
  std::vector<SweepOutcome> outcomes;
  std::vector<double> zero, one, multi, b1;
  outcomes.reserve(rows.size());
  for (const TaggedOutcome& t : rows) {
    outcomes.push_back(t.outcome);
    if (t.outcome.fixed && t.at_eps) {
      zero.push_back(t.at_eps->frac_zero());
      one.push_back(t.at_eps->frac_one());
      multi.push_back(t.at_eps->frac_multi());
      b1.push_back(t.at_eps->frac_b1());
    }
  }
  CellResult res;
  sweep_fields(res, outcomes, seed);
  json& c = res.cell;
  c["n_zero_mrec"] = static_cast<std::int64_t>(zero.size());
  mean_fields(c, "mean_zero_mrec", "zero_mrec_ci", zero, stream_seed(seed, kBootstrapTag + 1));
  mean_fields(c, "mean_one_mrec", "one_mrec_ci", one, stream_seed(seed, kBootstrapTag + 2));
  mean_fields(c, "mean_multi_mrec", "multi_mrec_ci", multi, stream_seed(seed, kBootstrapTag + 3));
  mean_fields(c, "mean_b1_at_eps", "b1_at_eps_ci", b1, stream_seed(seed, kBootstrapTag + 4));
  const double rho = rho_K(spec.params, sc.r_K, sc.K);
  c["predicted_zero_mrec"] = 1.0 - rho;
  const auto zero_gap = gap_of(c, "mean_zero_mrec", 1.0 - rho);
  c["zero_mrec_gap"] = opt(zero_gap);
  std::optional<SweepPrediction> pred;
  if (spec.regime) pred = predict_hard(spec.params, sc.r_K, sc.K, *spec.z_Ab1_frac, *spec.regime);
  prediction_fields(res, spec, pred);
  if (!c.contains("rho_K")) c["rho_K"] = rho;
  res.breach = res.breach || breaches(spec.tolerance, zero_gap);
  if (sinks.replicates) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      outcome_csv(*sinks.replicates, idx, sc, i, rows[i].outcome);
      const auto& s = rows[i].at_eps;
      if (s) {
        *sinks.replicates << ',' << format_double(s->frac_zero()) << ',' << format_double(s->frac_one()) << ','
                          << format_double(s->frac_multi()) << ',' << format_double(s->frac_b1()) << '\n';
      } else {
        *sinks.replicates << ",nan,nan,nan,nan\n";
      }
    }
  }
  if (!sinks.origins.empty()) write_origin_csv(*sinks.origins[idx], rows);
  return res;
}

CellResult run_monomorphic_cell(const ExperimentSpec& spec, std::size_t idx, const ScalingParams& sc,
                                unsigned workers, Sinks& sinks) {
  const std::uint64_t seed = experiment_cell_seed(spec, idx);
  const double t0 = spec.t_window_start.value_or(0.0), t1 = *spec.t_end;
  const double K = static_cast<double>(sc.K);
  struct Row {
    SweepStatus status;
    double avg;
    std::int64_t events;
  };
  std::vector<Row> rows(static_cast<std::size_t>(spec.n_replicates));
  parallel_for_index(rows.size(), workers, [&](std::size_t i) {
    SimConfig cfg;
    cfg.initial_state = scaled_initial(*spec.z, sc.K);
    cfg.seed = replicate_seed(seed, i);
    cfg.max_events = spec.max_events;
    cfg.epsilon = spec.epsilon;
    cfg.t_end = t1;
    double integral = 0.0, t_prev = 0.0;
    auto add = [&](double a, double b, std::int64_t total) {
      const double lo = std::max(a, t0), hi = std::min(b, t1);
      if (hi > lo) integral += (hi - lo) * static_cast<double>(total) / K;
    };
    const SweepRun run = run_sweep_observed(spec.params, sc, cfg,
                                            [&](double t, const PopState& before, const PopState&, int) {
                                              add(t_prev, t, before.total());
                                              t_prev = t;
                                              return true;
                                            });
    const SweepOutcome& o = run.outcome;
    if (o.status == SweepStatus::TimeLimit) add(t_prev, t1, o.final_state.total());
    rows[i] = {o.status, integral / (t1 - t0), o.events_used};
  });
  std::vector<double> avgs;
  std::int64_t n_trunc = 0;
  for (const Row& r : rows) {
    if (r.status == SweepStatus::Truncated) {
      ++n_trunc;
    } else {
      avgs.push_back(r.avg);
    }
  }
  CellResult res;
  json& c = res.cell;
  c["n"] = spec.n_replicates;
  c["n_truncated"] = n_trunc;
  c["n_valid"] = static_cast<std::int64_t>(avgs.size());
  c["window"] = json::array({t0, t1});
  mean_fields(c, "mean_density", "density_ci", avgs, stream_seed(seed, kBootstrapTag));
  const DerivedEcology e = derived_ecology(spec.params);
  const bool a_present = (*spec.z)(2) + (*spec.z)(3) > 0.0;
  const double predicted = a_present ? e.nbar_a : e.nbar_A;
  c["predicted"] = predicted;
  const auto gap = gap_of(c, "mean_density", predicted);
  c["gap"] = opt(gap);
  res.breach = breaches(spec.tolerance, gap);
  res.degraded = is_degraded(n_trunc, spec.n_replicates);
  if (sinks.replicates)
    for (std::size_t i = 0; i < rows.size(); ++i)
      *sinks.replicates << idx << ',' << sc.K << ',' << format_double(sc.r_K) << ',' << i << ','
                        << to_string(rows[i].status) << ',' << format_double(rows[i].avg) << ',' << rows[i].events
                        << '\n';
  return res;
}

CellResult run_jumps_cell(const ExperimentSpec& spec, std::size_t idx, const ScalingParams& sc, unsigned workers,
                          Sinks& sinks) {
  const std::uint64_t seed = experiment_cell_seed(spec, idx);
  const JumpStats js =
      jump_statistics(spec.params, sc, spec.epsilon, spec.n_replicates, seed, *spec.z_Ab1_frac, workers);
  CellResult res;
  json& c = res.cell;
  c["n"] = js.n_conditioned;
  c["n_attempted"] = js.n_attempted;
  c["M"] = js.M;
  c["statistic"] = js.statistic;
  c["statistic_ci"] = interval_json(js.statistic_ci);
  c["predicted"] = js.target;
  const double gap = std::abs(js.statistic - js.target);
  c["gap"] = gap;
  c["rel_gap"] = gap / js.target;
  c["s_minus"] = js.s_minus;
  c["mean_U_bound"] = 2.0 / (js.s_minus * js.s_minus);
  double max_mean_U = 0.0;
  for (std::int64_t k = 1; k < js.M; ++k) max_mean_U = std::max(max_mean_U, js.mean_U[static_cast<std::size_t>(k)]);
  c["max_mean_U"] = max_mean_U;
  res.breach = breaches(spec.tolerance, gap / js.target);
  if (sinks.replicates)
    for (std::size_t i = 0; i < js.per_replicate_sum.size(); ++i)
      *sinks.replicates << idx << ',' << sc.K << ',' << format_double(sc.r_K) << ',' << i << ','
                        << format_double(js.per_replicate_sum[i]) << '\n';
  return res;
}

CellResult run_bdp_cell(const ExperimentSpec& spec, std::size_t idx, const ScalingParams& sc, unsigned workers) {
  const SandwichReport rep = sandwich_check(spec.params, sc, spec.epsilon, spec.n_replicates,
                                            experiment_cell_seed(spec, idx), workers);
  CellResult res;
  json& c = res.cell;
  const std::int64_t n = rep.n_replicates;
  c["n"] = n;
  c["n_violating"] = rep.n_violating_replicates;
  c["n_inclusion_violations"] = rep.n_inclusion_violations;
  c["n_events_checked"] = rep.n_events_checked;
  c["s_minus"] = rep.rates.s_minus;
  c["s_plus"] = rep.rates.s_plus;
  c["n_N_hit"] = rep.n_N_hit;
  c["N_hit_frac"] = static_cast<double>(rep.n_N_hit) / static_cast<double>(n);
  c["N_hit_ci"] = interval_json(wilson_interval(rep.n_N_hit, n));
  c["n_plus_hit"] = rep.n_plus_hit;
  c["plus_hit_frac"] = static_cast<double>(rep.n_plus_hit) / static_cast<double>(n);
  c["plus_hit_ci"] = interval_json(wilson_interval(rep.n_plus_hit, n));
  c["plus_hit_predicted"] = rep.p_plus_hit;
  c["n_minus_hit"] = rep.n_minus_hit;
  c["minus_hit_frac"] = static_cast<double>(rep.n_minus_hit) / static_cast<double>(n);
  c["minus_hit_ci"] = interval_json(wilson_interval(rep.n_minus_hit, n));
  c["minus_hit_predicted"] = rep.p_minus_hit;
  res.breach = rep.n_violating_replicates > 0 || rep.n_inclusion_violations > 0;
  return res;
}

const char* replicates_header(Scenario s) {
  switch (s) {
    case Scenario::Soft:
    case Scenario::Hard: return kOutcomeHeader;
    case Scenario::Genealogy:
      return "cell,K,r_K,replicate,status,fixed,t_ext,p_ab1_final,n_a_final,t_eps_hit,s_eps_exit,events_used,"
             "frac_zero_mrec,frac_one_mrec,frac_multi_mrec,frac_b1_at_Teps";
    case Scenario::Monomorphic: return "cell,K,r_K,replicate,status,time_avg_density,events_used";
    case Scenario::Jumps: return "cell,K,r_K,replicate,per_replicate_sum";
    case Scenario::BdpCheck: break;
  }
  return nullptr;
}

ExperimentResult run_cells(const ExperimentSpec& spec, const RunOptions& options, Sinks& sinks) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const unsigned workers = resolve_workers(options.workers);
  if (sinks.replicates) *sinks.replicates << replicates_header(spec.scenario) << '\n';
  ExperimentResult result;
  json cells = json::array();
  for (std::size_t idx = 0; idx < spec.scaling.size(); ++idx) {
    const ScalingParams& sc = spec.scaling[idx];
    CellResult res;
    switch (spec.scenario) {
      case Scenario::Soft:
      case Scenario::Hard: res = run_sweep_cell(spec, idx, sc, workers, sinks); break;
      case Scenario::Genealogy: res = run_genealogy_cell(spec, idx, sc, workers, sinks); break;
      case Scenario::Monomorphic: res = run_monomorphic_cell(spec, idx, sc, workers, sinks); break;
      case Scenario::Jumps: res = run_jumps_cell(spec, idx, sc, workers, sinks); break;
      case Scenario::BdpCheck: res = run_bdp_cell(spec, idx, sc, workers); break;
    }
    res.cell["K"] = sc.K;
    res.cell["r_K"] = sc.r_K;
    res.cell["breach"] = res.breach;
    result.tolerance_breach = result.tolerance_breach || res.breach;
    result.degraded = result.degraded || res.degraded;
    cells.push_back(std::move(res.cell));
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json meta = {{"code_version", kCodeVersion},
               {"seed_base", spec.seed_base},
               {"scenario", to_string(spec.scenario)},
               {"degraded", result.degraded},
               {"tolerance_breach", result.tolerance_breach}};
  if (options.record_wall_time) meta["wall_time_s"] = wall;
  result.report = {{"schema_version", kSchemaVersion}, {"spec", to_json(spec)}, {"cells", cells}, {"meta", meta}};
  return result;
}

std::filesystem::path resolve(const RunOptions& options, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative() && !options.out_dir.empty()) p = std::filesystem::path(options.out_dir) / p;
  return p;
}

std::unique_ptr<std::ofstream> open_output(const std::filesystem::path& p) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  auto os = std::make_unique<std::ofstream>(p, std::ios::binary | std::ios::trunc);
  if (!*os) throw IoError("cannot open output file '" + p.string() + "' for writing");
  return os;
}

std::filesystem::path per_cell_path(const std::filesystem::path& p, std::size_t cell, std::size_t n_cells) {
  if (n_cells == 1) return p;
  std::filesystem::path q = p;
  q.replace_filename(p.stem().string() + ".cell" + std::to_string(cell) + p.extension().string());
  return q;
}

}  // namespace

std::uint64_t experiment_cell_seed(const ExperimentSpec& spec, std::size_t cell) {
  return stream_seed(spec.seed_base, cell);
}

ExperimentResult evaluate_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  Sinks none;
  return run_cells(spec, options, none);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  if (spec.outputs.replicates && spec.scenario == Scenario::BdpCheck)
    throw ValidationError("outputs.replicates is not produced by the bdp-check scenario");
  if (spec.outputs.origins && spec.scenario != Scenario::Genealogy)
    throw ValidationError("outputs.origins is produced by the genealogy scenario only");
  auto report_os = open_output(resolve(options, spec.outputs.report));
  std::unique_ptr<std::ofstream> replicates_os;
  std::vector<std::unique_ptr<std::ofstream>> origin_os;
  Sinks sinks;
  if (spec.outputs.replicates) {
    replicates_os = open_output(resolve(options, *spec.outputs.replicates));
    sinks.replicates = replicates_os.get();
  }
  if (spec.outputs.origins) {
    const auto base = resolve(options, *spec.outputs.origins);
    for (std::size_t c = 0; c < spec.scaling.size(); ++c) {
      origin_os.push_back(open_output(per_cell_path(base, c, spec.scaling.size())));
      sinks.origins.push_back(origin_os.back().get());
    }
  }
  ExperimentResult result = run_cells(spec, options, sinks);
  *report_os << dump_report(result.report);
  report_os->flush();
  if (!*report_os) throw IoError("failed writing report");
  return result;
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

void print_prediction_table(std::ostream& os, const ExperimentSpec& spec) {
  if (spec.scenario != Scenario::Soft && spec.scenario != Scenario::Hard && spec.scenario != Scenario::Genealogy)
    throw ValidationError("predict supports the soft, hard and genealogy scenarios");
  if (spec.scenario == Scenario::Genealogy && !spec.regime)
    throw ValidationError("predict for a genealogy scenario requires regime");
  const auto cell = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string("-"); };
  os << std::left << std::setw(10) << "K" << std::setw(22) << "r_K" << std::setw(13) << "regime" << std::setw(22)
     << "r_K*log(K)" << std::setw(22) << "rho_K" << std::setw(22) << "F" << std::setw(22) << "p_ab1_limit"
     << "fixation_prob\n";
  for (const ScalingParams& sc : spec.scaling) {
    const SweepPrediction p =
        spec.scenario == Scenario::Soft ? predict_soft(spec.params, sc.r_K, *spec.z)
                                        : predict_hard(spec.params, sc.r_K, sc.K, *spec.z_Ab1_frac, *spec.regime);
    os << std::left << std::setw(10) << sc.K << std::setw(22) << format_double(sc.r_K) << std::setw(13)
       << to_string(p.regime) << std::setw(22) << cell(p.r_log_K) << std::setw(22) << cell(p.rho_K) << std::setw(22)
       << cell(p.F_limit) << std::setw(22) << format_double(p.p_ab1_limit) << format_double(p.fixation_prob)
       << '\n';
  }
}

}  // namespace sweep
