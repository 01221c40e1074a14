#include "sweep/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

#include "sweep/bdp.hpp"
#include "sweep/errors.hpp"
#include "sweep/format.hpp"

namespace sweep {

using nlohmann::json;

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Soft: return "soft";
    case Scenario::Hard: return "hard";
    case Scenario::Monomorphic: return "monomorphic";
    case Scenario::BdpCheck: return "bdp-check";
    case Scenario::Genealogy: return "genealogy";
    case Scenario::Jumps: return "jumps";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  for (Scenario s : {Scenario::Soft, Scenario::Hard, Scenario::Monomorphic, Scenario::BdpCheck, Scenario::Genealogy,
                     Scenario::Jumps})
    if (name == to_string(s)) return s;
  throw ValidationError("unknown scenario '" + name +
                        "' (expected soft, hard, monomorphic, bdp-check, genealogy or jumps)");
}

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items())
    if (!keys.contains(item.key())) throw ValidationError("unknown key '" + item.key() + "' in " + where);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing required key '" + std::string(key) + "' in " + where);
  return *it;
}

double as_double(const json& v, const std::string& name) {
  if (!v.is_number()) throw ValidationError(name + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(name + " must be finite");
  return x;
}

std::int64_t as_int(const json& v, const std::string& name) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && std::floor(x) == x && std::abs(x) < 9.0e18) return static_cast<std::int64_t>(x);
  }
  throw ValidationError(name + " must be an integer");
}

std::uint64_t as_u64(const json& v, const std::string& name) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const std::int64_t x = as_int(v, name);
  if (x < 0) throw ValidationError(name + " must be >= 0");
  return static_cast<std::uint64_t>(x);
}

std::string as_string(const json& v, const std::string& name) {
  if (!v.is_string()) throw ValidationError(name + " must be a string");
  return v.get<std::string>();
}

Regime regime_from_string(const std::string& s) {
  if (s == "strong") return Regime::HardStrong;
  if (s == "weak") return Regime::HardWeak;
  throw ValidationError("regime must be 'strong' or 'weak', got '" + s + "'");
}

const char* regime_name(Regime r) { return r == Regime::HardStrong ? "strong" : "weak"; }

EcologyParams parse_params(const json& p) {
  reject_unknown(p, "params", {"f_A", "f_a", "D_A", "D_a", "C"});
  EcologyParams e;
  e.f_A = as_double(require(p, "f_A", "params"), "params.f_A");
  e.f_a = as_double(require(p, "f_a", "params"), "params.f_a");
  e.D_A = as_double(require(p, "D_A", "params"), "params.D_A");
  e.D_a = as_double(require(p, "D_a", "params"), "params.D_a");
  const json& C = require(p, "C", "params");
  if (!C.is_array() || C.size() != 2 || !C[0].is_array() || C[0].size() != 2 || !C[1].is_array() ||
      C[1].size() != 2)
    throw ValidationError("params.C must be a 2x2 array [[C_AA, C_Aa], [C_aA, C_aa]]");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) e.C(i, j) = as_double(C[i][j], "params.C");
  return e;
}

template <typename F>
void rethrow_as_validation(F&& f) {
  try {
    f();
  } catch (const ParameterError& e) {
    throw ValidationError(e.what());
  } catch (const RegimeError& e) {
    throw ValidationError(e.what());
  }
}

void require_assumption1(const EcologyParams& p) {
  const DerivedEcology e = derived_ecology(p);
  if (!e.assumption1_ok)
    throw ValidationError("Assumption 1 fails: need nbar_A > 0, nbar_a > 0 and S_Aa < 0 < S_aA (nbar_A = " +
                          format_double(e.nbar_A) + ", nbar_a = " + format_double(e.nbar_a) +
                          ", S_Aa = " + format_double(e.S_Aa) + ", S_aA = " + format_double(e.S_aA) + ")");
}

}  // namespace

void ExperimentSpec::validate() const {
  if (schema_version != kSchemaVersion)
    throw ValidationError("schema_version must be " + std::to_string(kSchemaVersion));
  if (n_replicates < 1) throw ValidationError("n_replicates >= 1 violated");
  if (scaling.empty()) throw ValidationError("scaling must list at least one {K, r_K} cell");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("0 < epsilon < 1 violated");
  if (max_events < 1) throw ValidationError("max_events >= 1 violated");
  if (tolerance && !(*tolerance >= 0.0)) throw ValidationError("tolerance >= 0 violated");
  if (fix_tolerance && !(*fix_tolerance >= 0.0)) throw ValidationError("fix_tolerance >= 0 violated");
  rethrow_as_validation([&] { params.validate(); });
  for (const ScalingParams& s : scaling) {
    rethrow_as_validation([&] { s.validate(); });
    if (mutant_threshold(s.K, epsilon) < 1) throw ValidationError("floor(epsilon K) >= 1 violated");
  }
  const bool hard_start = scenario == Scenario::Hard || scenario == Scenario::Genealogy ||
                          scenario == Scenario::Jumps || scenario == Scenario::BdpCheck;
  if (scenario == Scenario::Soft || scenario == Scenario::Monomorphic) {
    if (!z) throw ValidationError("scenario " + std::string(to_string(scenario)) + " requires z");
    if ((z->array() < 0.0).any()) throw ValidationError("z >= 0 violated");
    if (z_Ab1_frac) throw ValidationError("z_Ab1_frac applies to hard-sweep scenarios only");
  } else if (z) {
    throw ValidationError("z applies to soft and monomorphic scenarios only");
  }
  if (hard_start && z_Ab1_frac && !(*z_Ab1_frac >= 0.0 && *z_Ab1_frac <= 1.0))
    throw ValidationError("0 <= z_Ab1_frac <= 1 violated");
  if (regime && scenario != Scenario::Hard && scenario != Scenario::Genealogy)
    throw ValidationError("regime applies to hard and genealogy scenarios only");
  if ((t_end || t_window_start) && scenario != Scenario::Monomorphic)
    throw ValidationError("t_end and t_window_start apply to the monomorphic scenario only");

  switch (scenario) {
    case Scenario::Soft: {
      require_assumption1(params);
      if (!((*z)(2) + (*z)(3) > 0.0)) throw ValidationError("soft sweep requires z_a > 0");
      break;
    }
    case Scenario::Hard:
    case Scenario::Genealogy:
    case Scenario::Jumps:
    case Scenario::BdpCheck: {
      require_assumption1(params);
      if (scenario == Scenario::Hard && !regime)
        throw ValidationError("scenario hard requires regime ('strong' or 'weak')");
      if (scenario == Scenario::Jumps || scenario == Scenario::BdpCheck) {
        const double eps_max = max_coupling_eps(params);
        if (!(epsilon < eps_max))
          throw ValidationError("epsilon < S_aA / (2 C_aA C_Aa / C_AA + C_aa) = " + format_double(eps_max) +
                                " violated");
        rethrow_as_validation([&] { coupling_rates(params, epsilon); });
      }
      for (const ScalingParams& s : scaling) {
        if (hard_sweep_initial(params, s.K, z_Ab1_frac.value_or(0.5)).n_A() < 1)
          throw ValidationError("floor(nbar_A K) >= 1 violated for K = " + std::to_string(s.K));
        if (scenario == Scenario::BdpCheck && mutant_threshold(s.K, epsilon) < 2)
          throw ValidationError("floor(epsilon K) >= 2 violated for K = " + std::to_string(s.K));
      }
      break;
    }
    case Scenario::Monomorphic: {
      const double z_A = (*z)(0) + (*z)(1), z_a = (*z)(2) + (*z)(3);
      if ((z_A > 0.0) == (z_a > 0.0)) throw ValidationError("monomorphic scenario requires exactly one of z_A, z_a > 0");
      if (!t_end || !(*t_end > 0.0)) throw ValidationError("monomorphic scenario requires t_end > 0");
      const double t0 = t_window_start.value_or(0.0);
      if (!(t0 >= 0.0 && t0 < *t_end)) throw ValidationError("0 <= t_window_start < t_end violated");
      const Allele present = z_A > 0.0 ? Allele::A : Allele::a;
      if (!(params.f(present) > params.D(present) && params.comp(present, present) > 0.0))
        throw ValidationError("f > D and C > 0 for the present allele violated (no positive equilibrium)");
      break;
    }
  }
}

ExperimentSpec parse_spec(const json& doc) {
  reject_unknown(doc, "spec",
                 {"schema_version", "scenario", "params", "scaling", "z", "z_Ab1_frac", "regime", "n_replicates",
                  "seed_base", "epsilon", "max_events", "tolerance", "fix_tolerance", "t_end", "t_window_start",
                  "outputs"});
  ExperimentSpec s;
  s.schema_version = static_cast<int>(as_int(require(doc, "schema_version", "spec"), "schema_version"));
  if (s.schema_version != kSchemaVersion)
    throw ValidationError("schema_version must be " + std::to_string(kSchemaVersion));
  s.scenario = scenario_from_string(as_string(require(doc, "scenario", "spec"), "scenario"));
  s.params = parse_params(require(doc, "params", "spec"));

  const json& sc = require(doc, "scaling", "spec");
  if (!sc.is_array()) throw ValidationError("scaling must be an array of {K, r_K}");
  for (const json& cell : sc) {
    reject_unknown(cell, "scaling entry", {"K", "r_K"});
    ScalingParams p;
    p.K = as_int(require(cell, "K", "scaling entry"), "K");
    p.r_K = as_double(require(cell, "r_K", "scaling entry"), "r_K");
    s.scaling.push_back(p);
  }
  if (auto it = doc.find("z"); it != doc.end()) {
    if (!it->is_array() || it->size() != 4) throw ValidationError("z must be [z_Ab1, z_Ab2, z_ab1, z_ab2]");
    Vec4 z;
    for (int i = 0; i < 4; ++i) z(i) = as_double((*it)[i], "z");
    s.z = z;
  }
  if (auto it = doc.find("z_Ab1_frac"); it != doc.end()) s.z_Ab1_frac = as_double(*it, "z_Ab1_frac");
  if (auto it = doc.find("regime"); it != doc.end()) s.regime = regime_from_string(as_string(*it, "regime"));
  s.n_replicates = as_int(require(doc, "n_replicates", "spec"), "n_replicates");
  if (auto it = doc.find("seed_base"); it != doc.end()) s.seed_base = as_u64(*it, "seed_base");
  if (auto it = doc.find("epsilon"); it != doc.end()) s.epsilon = as_double(*it, "epsilon");
  if (auto it = doc.find("max_events"); it != doc.end()) s.max_events = as_int(*it, "max_events");
  if (auto it = doc.find("tolerance"); it != doc.end()) s.tolerance = as_double(*it, "tolerance");
  if (auto it = doc.find("fix_tolerance"); it != doc.end()) s.fix_tolerance = as_double(*it, "fix_tolerance");
  if (auto it = doc.find("t_end"); it != doc.end()) s.t_end = as_double(*it, "t_end");
  if (auto it = doc.find("t_window_start"); it != doc.end()) s.t_window_start = as_double(*it, "t_window_start");
  if (auto it = doc.find("outputs"); it != doc.end()) {
    reject_unknown(*it, "outputs", {"report", "replicates", "origins"});
    if (auto r = it->find("report"); r != it->end()) s.outputs.report = as_string(*r, "outputs.report");
    if (auto r = it->find("replicates"); r != it->end()) s.outputs.replicates = as_string(*r, "outputs.replicates");
    if (auto r = it->find("origins"); r != it->end()) s.outputs.origins = as_string(*r, "outputs.origins");
  }
  if ((s.scenario == Scenario::Hard || s.scenario == Scenario::Genealogy || s.scenario == Scenario::Jumps ||
       s.scenario == Scenario::BdpCheck) &&
      !s.z_Ab1_frac)
    s.z_Ab1_frac = 0.5;
  s.validate();
  return s;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_spec(doc);
}

json to_json(const ExperimentSpec& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["scenario"] = to_string(s.scenario);
  j["params"] = {{"f_A", s.params.f_A},
                 {"f_a", s.params.f_a},
                 {"D_A", s.params.D_A},
                 {"D_a", s.params.D_a},
                 {"C", {{s.params.C(0, 0), s.params.C(0, 1)}, {s.params.C(1, 0), s.params.C(1, 1)}}}};
  j["scaling"] = json::array();
  for (const ScalingParams& c : s.scaling) j["scaling"].push_back({{"K", c.K}, {"r_K", c.r_K}});
  if (s.z) j["z"] = {(*s.z)(0), (*s.z)(1), (*s.z)(2), (*s.z)(3)};
  if (s.z_Ab1_frac) j["z_Ab1_frac"] = *s.z_Ab1_frac;
  if (s.regime) j["regime"] = regime_name(*s.regime);
  j["n_replicates"] = s.n_replicates;
  j["seed_base"] = s.seed_base;
  j["epsilon"] = s.epsilon;
  j["max_events"] = s.max_events;
  if (s.tolerance) j["tolerance"] = *s.tolerance;
  if (s.fix_tolerance) j["fix_tolerance"] = *s.fix_tolerance;
  if (s.t_end) j["t_end"] = *s.t_end;
  if (s.t_window_start) j["t_window_start"] = *s.t_window_start;
  json out = {{"report", s.outputs.report}};
  if (s.outputs.replicates) out["replicates"] = *s.outputs.replicates;
  if (s.outputs.origins) out["origins"] = *s.outputs.origins;
  j["outputs"] = out;
  return j;
}

}  // namespace sweep
