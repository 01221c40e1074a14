#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "sweep/config.hpp"

namespace sweep {

struct RunOptions {
  unsigned workers = 1;
  std::string out_dir;       ///< relative output paths are resolved against this
  bool record_wall_time = true;
};

struct ExperimentResult {
  nlohmann::json report;
  bool tolerance_breach = false;
  bool degraded = false;
};

/// Runs every (K, r_K) cell of the spec, aggregates by replicate index and
/// writes the report and any requested CSVs. Output files are opened before
/// the first replicate; failure throws IoError.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Seed base of one cell; replicate i of the cell runs with
/// replicate_seed(experiment_cell_seed(spec, cell), i).
std::uint64_t experiment_cell_seed(const ExperimentSpec& spec, std::size_t cell);

/// Same as run_experiment without touching the file system.
ExperimentResult evaluate_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Canonical serialization (two-space indent, sorted keys, trailing newline).
std::string dump_report(const nlohmann::json& report);

/// One row per cell: K, r_K, regime, r_K log K, rho_K, F, p_ab1 limit and
/// fixation probability. Soft, hard and genealogy scenarios only.
void print_prediction_table(std::ostream& os, const ExperimentSpec& spec);

/// Process exit status: 0 ok, 1 tolerance breach.
inline int exit_status(const ExperimentResult& r) { return r.tolerance_breach ? 1 : 0; }

inline const char* kCodeVersion = "0.1.0";

}  // namespace sweep
