#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sweep/model.hpp"
#include "sweep/predict.hpp"

namespace sweep {

enum class Scenario { Soft, Hard, Monomorphic, BdpCheck, Genealogy, Jumps };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct OutputPaths {
  std::string report = "report.json";
  std::optional<std::string> replicates;  ///< per-replicate CSV
  std::optional<std::string> origins;     ///< genealogy origin CSV
};

/// Parsed experiment configuration. Defaults are filled in, so to_json of a
/// parsed spec is its normal form.
struct ExperimentSpec {
  int schema_version = 1;
  Scenario scenario = Scenario::Soft;
  EcologyParams params;
  std::vector<ScalingParams> scaling;
  std::optional<Vec4> z;                  ///< soft, monomorphic
  std::optional<double> z_Ab1_frac;       ///< hard, genealogy, jumps
  std::optional<Regime> regime;           ///< hard, genealogy
  std::int64_t n_replicates = 0;
  std::uint64_t seed_base = 0;
  double epsilon = 0.1;
  std::int64_t max_events = 500'000'000;
  std::optional<double> tolerance;        ///< bound on each cell's gap
  std::optional<double> fix_tolerance;    ///< bound on |fix_frac - predicted_fix|
  std::optional<double> t_end;            ///< monomorphic
  std::optional<double> t_window_start;   ///< monomorphic: time average over [t_window_start, t_end]
  OutputPaths outputs;

  /// Checks scenario-specific fields and module preconditions. Throws
  /// ValidationError naming the violated inequality.
  void validate() const;
};

inline constexpr int kSchemaVersion = 1;

/// Parses and validates. Unknown keys are rejected with ValidationError.
ExperimentSpec parse_spec(const nlohmann::json& doc);
ExperimentSpec load_spec(const std::string& path);
nlohmann::json to_json(const ExperimentSpec& spec);

}  // namespace sweep
