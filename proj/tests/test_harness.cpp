#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sweep/errors.hpp"
#include "sweep/harness.hpp"
#include "sweep/ssa.hpp"

using namespace sweep;
using nlohmann::json;
using doctest::Approx;

namespace {

json soft_doc() {
  return json::parse(R"({
    "schema_version": 1,
    "scenario": "soft",
    "params": {"f_A": 1, "f_a": 2, "D_A": 0, "D_a": 0, "C": [[1, 0.9], [0.5, 1]]},
    "scaling": [{"K": 300, "r_K": 0}, {"K": 300, "r_K": 0.5}],
    "z": [0.5, 0.1, 0.1, 0.3],
    "n_replicates": 40,
    "seed_base": 17
  })");
}

json hard_doc() {
  return json::parse(R"({
    "schema_version": 1,
    "scenario": "hard",
    "params": {"f_A": 1, "f_a": 2, "D_A": 0, "D_a": 0, "C": [[1, 1], [1, 1]]},
    "scaling": [{"K": 300, "r_K": 0.3}],
    "regime": "strong",
    "n_replicates": 60,
    "seed_base": 3,
    "tolerance": 0.2
  })");
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sweep_harness_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) row.push_back(f);
    rows.push_back(row);
  }
  return rows;
}

RunOptions quiet(unsigned workers) {
  RunOptions o;
  o.workers = workers;
  o.record_wall_time = false;
  return o;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("spec validation rejects bad input") {
    json d = soft_doc();
    d["n_replicates"] = 0;
    CHECK_THROWS_AS(parse_spec(d), ValidationError);

    d = soft_doc();
    d["surprise"] = 1;
    CHECK_THROWS_AS(parse_spec(d), ValidationError);

    d = soft_doc();
    d["params"]["g"] = 1;
    CHECK_THROWS_AS(parse_spec(d), ValidationError);

    d = soft_doc();
    d["scaling"] = json::array();
    CHECK_THROWS_AS(parse_spec(d), ValidationError);

    d = soft_doc();
    d["z"] = {0.5, 0.5, 0.0, 0.0};
    CHECK_THROWS_AS(parse_spec(d), ValidationError);

    d = hard_doc();
    d.erase("regime");
    CHECK_THROWS_AS(parse_spec(d), ValidationError);

    d = soft_doc();
    d["scenario"] = "lunar";
    CHECK_THROWS_AS(parse_spec(d), ValidationError);

    d = soft_doc();
    d["scaling"][0]["r_K"] = 2.0;
    CHECK_THROWS_AS(parse_spec(d), ValidationError);
  }

  TEST_CASE("parsed spec round-trips through its normal form") {
    const ExperimentSpec s = parse_spec(hard_doc());
    CHECK(*s.z_Ab1_frac == 0.5);
    CHECK(s.epsilon == 0.1);
    const json normal = to_json(s);
    CHECK(to_json(parse_spec(normal)) == normal);
  }

  TEST_CASE("without recombination the soft sweep keeps the mutant proportion on average") {
    json d = soft_doc();
    d["scaling"] = {{{"K", 400}, {"r_K", 0.0}}};
    d["n_replicates"] = 100;
    const ExperimentResult r = evaluate_experiment(parse_spec(d), quiet(2));
    const json& cell = r.report["cells"][0];
    CHECK(cell["predicted"].get<double>() == Approx(0.25));
    const double m = cell["mean_p_ab1"].get<double>();
    const double width = cell["p_ci"][1].get<double>() - cell["p_ci"][0].get<double>();
    CHECK(std::abs(m - 0.25) <= 2.0 * width);
    CHECK(cell["n_fixed"].get<std::int64_t>() >= 99);
  }

  TEST_CASE("reports are byte-identical across worker counts") {
    const ExperimentSpec s = parse_spec(soft_doc());
    const std::string a = dump_report(evaluate_experiment(s, quiet(1)).report);
    const std::string b = dump_report(evaluate_experiment(s, quiet(4)).report);
    CHECK(a == b);
    CHECK(a == dump_report(evaluate_experiment(s, quiet(3)).report));
  }

  TEST_CASE("different seeds give different reports") {
    json d = soft_doc();
    const std::string a = dump_report(evaluate_experiment(parse_spec(d), quiet(2)).report);
    d["seed_base"] = 18;
    const std::string b = dump_report(evaluate_experiment(parse_spec(d), quiet(2)).report);
    CHECK(a != b);
  }

  TEST_CASE("replicate CSV reproduces the aggregates") {
    const auto dir = scratch("csv");
    json d = hard_doc();
    d["outputs"] = {{"report", "r.json"}, {"replicates", "reps.csv"}};
    RunOptions o = quiet(2);
    o.out_dir = dir.string();
    const ExperimentResult r = run_experiment(parse_spec(d), o);
    const auto rows = read_csv(dir / "reps.csv");
    REQUIRE(rows.size() == 61);
    CHECK(rows[0][0] == "cell");
    CHECK(rows[0][7] == "p_ab1_final");
    std::int64_t fixed = 0;
    double sum = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][5] != "1") continue;
      ++fixed;
      sum += std::stod(rows[i][7]);
    }
    const json& cell = r.report["cells"][0];
    CHECK(cell["n_fixed"].get<std::int64_t>() == fixed);
    CHECK(std::abs(cell["mean_p_ab1"].get<double>() - sum / static_cast<double>(fixed)) <= 1e-12);

    std::ifstream in(dir / "r.json");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == dump_report(r.report));
  }

  TEST_CASE("replicate i of a cell is reproducible from its seed") {
    const ExperimentSpec s = parse_spec(hard_doc());
    const auto dir = scratch("repro");
    json d = hard_doc();
    d["outputs"] = {{"report", "r.json"}, {"replicates", "reps.csv"}};
    RunOptions o = quiet(3);
    o.out_dir = dir.string();
    run_experiment(parse_spec(d), o);
    const auto rows = read_csv(dir / "reps.csv");
    for (std::size_t i : {0u, 7u, 59u}) {
      SimConfig c;
      c.initial_state = hard_sweep_initial(s.params, 300, 0.5);
      c.seed = replicate_seed(experiment_cell_seed(s, 0), i);
      const SweepOutcome out = run_sweep(s.params, s.scaling[0], c).outcome;
      CHECK(rows[i + 1][4] == to_string(out.status));
      CHECK(std::stoll(rows[i + 1].back()) == out.events_used);
    }
  }

  TEST_CASE("unwritable output fails before any simulation") {
    json d = hard_doc();
    d["n_replicates"] = 100000000;
    d["scaling"] = {{{"K", 1000000}, {"r_K", 0.3}}};
    d["outputs"] = {{"report", "/proc/no/such/dir/report.json"}};
    CHECK_THROWS_AS(run_experiment(parse_spec(d)), IoError);
  }

  TEST_CASE("tolerance breach drives the exit status") {
    json d = hard_doc();
    d["tolerance"] = 1e-9;
    const ExperimentResult r = evaluate_experiment(parse_spec(d), quiet(2));
    CHECK(r.tolerance_breach);
    CHECK(exit_status(r) == 1);
    CHECK(r.report["meta"]["tolerance_breach"].get<bool>());
    d["tolerance"] = 1.0;
    CHECK(exit_status(evaluate_experiment(parse_spec(d), quiet(2))) == 0);
  }

  TEST_CASE("prediction table lists every cell") {
    json d = hard_doc();
    d["regime"] = "weak";
    d["scaling"] = {{{"K", 10000}, {"r_K", 1.0 / (2.0 * std::log(10000.0))}}, {{"K", 10000}, {"r_K", 0.0}}};
    std::ostringstream os;
    print_prediction_table(os, parse_spec(d));
    const std::string out = os.str();
    CHECK(out.find("p_ab1_limit") != std::string::npos);
    CHECK(out.find("hard-weak") != std::string::npos);
    CHECK(out.find("0.68393") != std::string::npos);
    CHECK(std::count(out.begin(), out.end(), '\n') == 3);
  }

  TEST_CASE("diagnostic scenarios produce their cell fields") {
    json g = hard_doc();
    g["scenario"] = "genealogy";
    g["regime"] = "weak";
    g["n_replicates"] = 20;
    const json gc = evaluate_experiment(parse_spec(g), quiet(2)).report["cells"][0];
    CHECK(gc.contains("mean_zero_mrec"));
    CHECK(gc.contains("predicted_zero_mrec"));

    json j = hard_doc();
    j["scenario"] = "jumps";
    j.erase("regime");
    j["n_replicates"] = 40;
    j["scaling"] = {{{"K", 1000}, {"r_K", 0.1}}};
    const json jc = evaluate_experiment(parse_spec(j), quiet(2)).report["cells"][0];
    CHECK(jc["n"].get<std::int64_t>() == 40);
    CHECK(jc.contains("rel_gap"));

    json b = hard_doc();
    b["scenario"] = "bdp-check";
    b.erase("regime");
    b.erase("tolerance");
    b["n_replicates"] = 50;
    b["scaling"] = {{{"K", 1000}, {"r_K", 0.1}}};
    const ExperimentResult br = evaluate_experiment(parse_spec(b), quiet(2));
    CHECK(br.report["cells"][0]["n_violating"].get<std::int64_t>() == 0);
    CHECK_FALSE(br.tolerance_breach);

    const json m = json::parse(R"({
      "schema_version": 1,
      "scenario": "monomorphic",
      "params": {"f_A": 1, "f_a": 2, "D_A": 0, "D_a": 1, "C": [[1, 1], [1, 1]]},
      "scaling": [{"K": 500, "r_K": 0}],
      "z": [0, 0, 1, 0],
      "t_end": 20, "t_window_start": 5,
      "n_replicates": 4, "seed_base": 1, "tolerance": 0.2
    })");
    const json mc = evaluate_experiment(parse_spec(m), quiet(2)).report["cells"][0];
    CHECK(mc["predicted"].get<double>() == Approx(1.0));
    CHECK_FALSE(mc["breach"].get<bool>());
  }
}
