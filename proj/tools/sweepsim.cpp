// sweepsim: command-line front end for the sweep library.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "sweep/dynsys.hpp"
#include "sweep/errors.hpp"
#include "sweep/format.hpp"
#include "sweep/harness.hpp"
#include "sweep/ssa.hpp"

namespace {

using nlohmann::json;
using namespace sweep;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  std::string out;
};

void log(const std::string& msg) { std::cerr << "sweepsim: " << msg << '\n'; }

json read_json(const std::string& path) {
  if (path.empty()) throw ValidationError("--config PATH is required");
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

ExperimentSpec load(const Globals& g, const char* scenario_override = nullptr) {
  json doc = read_json(g.config);
  if (scenario_override && doc.is_object()) doc["scenario"] = scenario_override;
  if (g.seed && doc.is_object()) doc["seed_base"] = *g.seed;
  return parse_spec(doc);
}

std::filesystem::path output_path(const Globals& g, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !g.out.empty()) path = std::filesystem::path(g.out) / path;
  return path;
}

std::ofstream open_for_write(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open output file '" + p.string() + "' for writing");
  return os;
}

int run_experiment_cmd(const Globals& g, const char* scenario, bool print) {
  const ExperimentSpec spec = load(g, scenario);
  log(std::string("running ") + to_string(spec.scenario) + " experiment, " + std::to_string(spec.scaling.size()) +
      " cell(s) x " + std::to_string(spec.n_replicates) + " replicates");
  RunOptions opts;
  opts.workers = g.workers;
  opts.out_dir = g.out;
  const ExperimentResult r = run_experiment(spec, opts);
  if (print) std::cout << dump_report(r.report);
  log("report written to " + output_path(g, spec.outputs.report).string());
  if (r.degraded) log("warning: more than 1% of replicates truncated in some cell (report flagged degraded)");
  if (r.tolerance_breach) log("tolerance breach in at least one cell");
  return exit_status(r);
}

struct SimulateOpts {
  std::size_t cell = 0;
  std::optional<std::size_t> replicate;
  double dt = 0.0;
  bool full = false;
  std::string trajectory;
};

int run_simulate(const Globals& g, const SimulateOpts& o) {
  const ExperimentSpec spec = load(g);
  if (spec.scenario != Scenario::Soft && spec.scenario != Scenario::Hard && spec.scenario != Scenario::Monomorphic)
    throw ValidationError("simulate supports the soft, hard and monomorphic scenarios");
  if (o.cell >= spec.scaling.size()) throw ValidationError("--cell out of range");
  const ScalingParams& sc = spec.scaling[o.cell];
  SimConfig cfg;
  cfg.initial_state = spec.scenario == Scenario::Hard ? hard_sweep_initial(spec.params, sc.K, *spec.z_Ab1_frac)
                                                      : scaled_initial(*spec.z, sc.K);
  cfg.seed = o.replicate ? replicate_seed(experiment_cell_seed(spec, o.cell), *o.replicate) : spec.seed_base;
  cfg.max_events = spec.max_events;
  cfg.epsilon = spec.epsilon;
  cfg.t_end = spec.t_end;
  if (o.full) {
    cfg.record_mode = RecordMode::FullEvents;
  } else if (o.dt > 0.0) {
    cfg.record_mode = RecordMode::Sampled;
    cfg.sample_dt = o.dt;
  }
  std::optional<std::ofstream> traj;
  if (!o.trajectory.empty()) {
    if (cfg.record_mode == RecordMode::OutcomeOnly) throw ValidationError("--trajectory needs --dt or --full-events");
    traj.emplace(open_for_write(output_path(g, o.trajectory)));
  }
  const SweepRun run = run_sweep(spec.params, sc, cfg);
  const SweepOutcome& out = run.outcome;
  const auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  const PopState& f = out.final_state;
  const json j = {{"seed", cfg.seed},
                  {"K", sc.K},
                  {"r_K", sc.r_K},
                  {"status", to_string(out.status)},
                  {"fixed", out.fixed},
                  {"t_ext", opt(out.t_ext)},
                  {"p_ab1_final", opt(out.p_ab1_final)},
                  {"n_a_final", out.n_a_final},
                  {"t_eps_hit", opt(out.t_eps_hit)},
                  {"s_eps_exit", opt(out.s_eps_exit)},
                  {"events_used", out.events_used},
                  {"t_final", out.t_final},
                  {"final_state", {f.n_Ab1, f.n_Ab2, f.n_ab1, f.n_ab2}}};
  std::cout << j.dump(2) << '\n';
  if (traj) write_trajectory_csv(*traj, run.trajectory);
  return 0;
}

struct OdeOpts {
  std::optional<double> r;
  double t_end = 50.0;
  double dt = 0.1;
  std::string output;
};

int run_ode(const Globals& g, const OdeOpts& o) {
  const ExperimentSpec spec = load(g);
  if (!spec.z) throw ValidationError("ode needs a config with z");
  const double r = o.r.value_or(spec.scaling.front().r_K);
  DenseState z;
  z.n = *spec.z;
  OdeOptions opts;
  opts.sample_dt = o.dt;
  const auto traj = integrate_lv4(spec.params, r, z, o.t_end, opts);
  if (o.output.empty()) {
    write_dense_csv(std::cout, traj);
  } else {
    auto os = open_for_write(output_path(g, o.output));
    write_dense_csv(os, traj);
  }
  const DenseState& last = traj.back().state;
  log("t = " + format_double(traj.back().t) + ": p_ab1 = " + format_double(last.p_ab1()) +
      ", F = " + format_double(last.F));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-locus selective sweep simulator"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Override seed_base")->group("Global");
  app.add_option("--config", g.config, "Experiment JSON file")->group("Global");
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)")->group("Global");
  app.add_option("--out", g.out, "Directory for relative output paths")->group("Global");

  auto* simulate = app.add_subcommand("simulate", "Run one replicate and print its outcome as JSON");
  simulate->fallthrough();
  SimulateOpts sim;
  std::size_t replicate = 0;
  simulate->add_option("--cell", sim.cell, "Scaling cell index");
  auto* rep_opt = simulate->add_option("--replicate", replicate, "Reproduce replicate i of the experiment");
  simulate->add_option("--dt", sim.dt, "Sample the trajectory on a grid of this spacing");
  simulate->add_flag("--full-events", sim.full, "Record every event");
  simulate->add_option("--trajectory", sim.trajectory, "Trajectory CSV path");

  auto* experiment = app.add_subcommand("experiment", "Run the configured experiment and write its report");
  auto* genealogy = app.add_subcommand("genealogy", "Run the experiment as a genealogy scenario");
  auto* jumps = app.add_subcommand("jumps", "Run the experiment as a jump-statistics scenario");
  auto* bdp = app.add_subcommand("bdp-check", "Run the coupling sandwich check");
  bool print = false;
  for (auto* sub : {experiment, genealogy, jumps, bdp}) {
    sub->fallthrough();
    sub->add_flag("--print", print, "Also write the report to standard output");
  }

  auto* predict = app.add_subcommand("predict", "Print predicted limits for each cell");
  predict->fallthrough();

  auto* ode = app.add_subcommand("ode", "Integrate the four-type flow from z and write a CSV");
  ode->fallthrough();
  OdeOpts od;
  double r_value = 0.0;
  auto* r_opt = ode->add_option("--r", r_value, "Recombination rate (default: first cell r_K)");
  ode->add_option("--t-end", od.t_end, "Final time");
  ode->add_option("--dt", od.dt, "Output grid spacing");
  ode->add_option("--output", od.output, "CSV path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (*seed_opt) g.seed = seed_value;
  if (*rep_opt) sim.replicate = replicate;
  if (*r_opt) od.r = r_value;

  try {
    if (*simulate) return run_simulate(g, sim);
    if (*experiment) return run_experiment_cmd(g, nullptr, print);
    if (*genealogy) return run_experiment_cmd(g, "genealogy", print);
    if (*jumps) return run_experiment_cmd(g, "jumps", print);
    if (*bdp) return run_experiment_cmd(g, "bdp-check", print);
    if (*predict) {
      print_prediction_table(std::cout, load(g));
      return 0;
    }
    if (*ode) return run_ode(g, od);
  } catch (const ValidationError& e) {
    log(std::string("validation error: ") + e.what());
    return 2;
  } catch (const ParameterError& e) {
    log(std::string("validation error: ") + e.what());
    return 2;
  } catch (const RegimeError& e) {
    log(std::string("validation error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 3;
  }
  return 2;
}
