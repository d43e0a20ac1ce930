#pragma once

// JSON run configuration and experiment matrices. Every rejected field is
// reported with its JSON path.

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sacfgm/baselines.hpp"
#include "sacfgm/generators.hpp"
#include "sacfgm/problem_io.hpp"
#include "sacfgm/schedule.hpp"

namespace sacfgm {

using nlohmann::json;

enum class RecordFormat { Csv, Json };

struct RunConfig {
  json problem;                   // generator spec, {"file": path} or an inline problem document
  ScheduleConfig schedule;
  bool d_tilde_from_start = false;  // d_tilde = ||x0 - x*||, resolved once the problem is built
  StopRule stop = StopRule::after(100);
  std::vector<std::uint64_t> seeds{1};
  std::string outputs = "out";
  bool emit_csv = true;
  bool emit_json = true;
  bool emit_plotdata = false;
  RecordFormat format = RecordFormat::Csv;
  std::optional<BaselineKind> baseline;  // unset: the adaptive method
  BaselineParams baseline_params;
  RunOptions options;
};

struct MatrixEntry {
  std::string label;
  RunConfig config;
};

struct ExperimentMatrix {
  std::vector<MatrixEntry> entries;
  enum class Axis { Iterations, Calls } budget_axis = Axis::Iterations;
  std::string outputs = "out";
};

namespace config_detail {

inline const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(path + "." + key + ": missing");
  return j.at(key);
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

inline std::uint64_t get_count(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ConfigError(path + ": expected a nonnegative integer");
}

inline std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a string");
  return j.get<std::string>();
}

inline bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
  return j.get<bool>();
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(path + "." + k + ": unknown field");
}

template <class T>
void read_opt(const json& j, const char* key, const std::string& path, T& out) {
  if (!j.contains(key)) return;
  const std::string p = path + "." + key;
  if constexpr (std::is_same_v<T, double>) out = get_number(j.at(key), p);
  else if constexpr (std::is_same_v<T, std::uint64_t>) out = get_count(j.at(key), p);
  else if constexpr (std::is_same_v<T, Eigen::Index>) out = static_cast<Eigen::Index>(get_count(j.at(key), p));
  else if constexpr (std::is_same_v<T, bool>) out = get_bool(j.at(key), p);
  else out = get_string(j.at(key), p);
}

}  // namespace config_detail

/// The problem used when a config gives none: the shared-Hessian finite-sum
/// quadratic of the acceptance suite.
inline json default_problem_spec() {
  return json{{"generator", "quadratic"}, {"dim", 10},        {"components", 200}, {"condition", 100.0},
              {"max_curvature", 0.1},     {"noise", 0.1},     {"curvature_spread", 0.0},
              {"x0_distance", 1.0},       {"seed", 12}};
}

/// Build a problem from a generator spec, a {"file": path} reference or an inline document.
inline CompositeProblem build_problem(const json& j, const std::string& path = "problem") {
  using namespace config_detail;
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  if (j.contains("file")) return load_problem(get_string(j.at("file"), path + ".file"));
  if (!j.contains("generator")) {
    try {
      return problem_from_json(j, path);
    } catch (const json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  const std::string gen = get_string(j.at("generator"), path + ".generator");
  try {
    if (gen == "quadratic") {
      check_keys(j, {"generator", "dim", "components", "condition", "max_curvature", "noise", "curvature_spread",
                     "x0_distance", "seed"},
                 path);
      QuadraticSpec s;
      read_opt(j, "dim", path, s.dim);
      read_opt(j, "components", path, s.components);
      read_opt(j, "condition", path, s.condition);
      read_opt(j, "max_curvature", path, s.max_curvature);
      read_opt(j, "noise", path, s.noise);
      read_opt(j, "curvature_spread", path, s.curvature_spread);
      read_opt(j, "x0_distance", path, s.x0_distance);
      read_opt(j, "seed", path, s.seed);
      return make_quadratic(s);
    }
    if (gen == "least_squares" || gen == "lasso") {
      check_keys(j, {"generator", "dim", "components", "heterogeneity", "noise", "x0_distance", "seed", "l1_weight"},
                 path);
      LassoSpec s;
      read_opt(j, "dim", path, s.base.dim);
      read_opt(j, "components", path, s.base.components);
      read_opt(j, "heterogeneity", path, s.base.heterogeneity);
      read_opt(j, "noise", path, s.base.noise);
      read_opt(j, "x0_distance", path, s.base.x0_distance);
      read_opt(j, "seed", path, s.base.seed);
      read_opt(j, "l1_weight", path, s.l1_weight);
      return gen == "lasso" ? make_lasso(s) : make_least_squares(s.base);
    }
    if (gen == "logistic") {
      check_keys(j, {"generator", "dim", "components", "radius", "label_noise", "seed"}, path);
      LogisticSpec s;
      read_opt(j, "dim", path, s.dim);
      read_opt(j, "components", path, s.components);
      read_opt(j, "radius", path, s.radius);
      read_opt(j, "label_noise", path, s.label_noise);
      read_opt(j, "seed", path, s.seed);
      return make_logistic(s);
    }
  } catch (const ContractViolation& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".generator: unknown generator '" + gen +
                    "' (expected quadratic, least_squares, lasso or logistic)");
}

inline ScheduleConfig parse_schedule(const json& j, const std::string& path, bool& d_tilde_from_start) {
  using namespace config_detail;
  check_keys(j, {"variant", "beta", "eta1", "d_tilde", "n", "v0", "lambda", "c", "c_tilde", "inflation",
                 "failure_prob", "hp_proxy_factor", "batch_cap"},
             path);
  ScheduleConfig s;
  if (j.contains("variant")) {
    try {
      s.variant = parse_variant(get_string(j.at("variant"), path + ".variant"));
    } catch (const ConfigError& e) {
      throw ConfigError(path + "." + e.what());
    }
  }
  read_opt(j, "beta", path, s.beta);
  read_opt(j, "eta1", path, s.eta1);
  if (j.contains("d_tilde")) {
    const json& d = j.at("d_tilde");
    if (d.is_string() && d.get<std::string>() == "initial_distance") {
      d_tilde_from_start = true;
    } else {
      s.d_tilde = get_number(d, path + ".d_tilde");
      d_tilde_from_start = false;
    }
  }
  if (j.contains("n")) s.horizon = get_count(j.at("n"), path + ".n");
  read_opt(j, "v0", path, s.v0);
  read_opt(j, "lambda", path, s.lambda);
  if (j.contains("c") || j.contains("c_tilde")) {
    BatchConstants c = default_constants(s.variant, s.lambda);
    read_opt(j, "c", path, c.c);
    read_opt(j, "c_tilde", path, c.c_tilde);
    s.constants = c;
  }
  read_opt(j, "inflation", path, s.inflation);
  read_opt(j, "failure_prob", path, s.failure_prob);
  read_opt(j, "hp_proxy_factor", path, s.hp_proxy_factor);
  read_opt(j, "batch_cap", path, s.batch_cap);
  return s;
}

inline StopRule parse_stop(const json& j, const std::string& path) {
  using namespace config_detail;
  check_keys(j, {"iterations", "target_gap", "max_iterations", "max_calls"}, path);
  if (j.contains("target_gap"))
    return StopRule::target(get_number(j.at("target_gap"), path + ".target_gap"),
                            get_count(need(j, "max_iterations", path), path + ".max_iterations"));
  if (j.contains("max_calls"))
    return StopRule::budget(get_count(j.at("max_calls"), path + ".max_calls"),
                            j.contains("max_iterations") ? get_count(j.at("max_iterations"), path + ".max_iterations")
                                                         : std::numeric_limits<std::uint64_t>::max() / 2);
  return StopRule::after(get_count(need(j, "iterations", path), path + ".iterations"));
}

/// Checks that do not need the problem instance.
inline void validate_run_config(const RunConfig& rc, const std::string& path = "config") {
  if (rc.seeds.empty()) throw ConfigError(path + ".seeds: at least one seed required");
  if (rc.stop.iterations == 0) throw ConfigError(path + ".stop: iterations must be >= 1");
  if (!rc.baseline || *rc.baseline == BaselineKind::DeterministicACFGM) {
    ScheduleConfig s = rc.schedule;
    if (rc.d_tilde_from_start) s.d_tilde = 1.0;  // resolved later
    try {
      validate(s);
    } catch (const ConfigError& e) {
      throw ConfigError(path + "." + e.what());
    }
  }
}

inline RunConfig parse_run_config(const json& j, const std::string& path = "config") {
  using namespace config_detail;
  check_keys(j, {"problem", "schedule", "stop", "seeds", "outputs", "emit", "format", "method", "baseline", "options"},
             path);
  RunConfig rc;
  rc.problem = j.contains("problem") ? j.at("problem") : default_problem_spec();
  if (j.contains("schedule")) rc.schedule = parse_schedule(j.at("schedule"), path + ".schedule", rc.d_tilde_from_start);
  if (j.contains("stop")) {
    rc.stop = parse_stop(j.at("stop"), path + ".stop");
  } else if (rc.schedule.horizon) {
    rc.stop = StopRule::after(*rc.schedule.horizon);
  }
  if (rc.schedule.variant == Variant::A_FixedHorizon && !rc.schedule.horizon &&
      rc.stop.kind == StopRule::Kind::Iterations)
    rc.schedule.horizon = rc.stop.iterations;
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (!s.is_array()) throw ConfigError(path + ".seeds: expected an array of integers");
    rc.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i)
      rc.seeds.push_back(get_count(s[i], path + ".seeds[" + std::to_string(i) + "]"));
  }
  read_opt(j, "outputs", path, rc.outputs);
  if (j.contains("emit")) {
    const json& e = j.at("emit");
    if (!e.is_array()) throw ConfigError(path + ".emit: expected an array");
    rc.emit_csv = rc.emit_json = rc.emit_plotdata = false;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string v = get_string(e[i], path + ".emit[" + std::to_string(i) + "]");
      if (v == "csv") rc.emit_csv = true;
      else if (v == "json") rc.emit_json = true;
      else if (v == "plotdata") rc.emit_plotdata = true;
      else throw ConfigError(path + ".emit[" + std::to_string(i) + "]: unknown output '" + v + "'");
    }
  }
  if (j.contains("format")) {
    const std::string f = get_string(j.at("format"), path + ".format");
    if (f == "csv") rc.format = RecordFormat::Csv;
    else if (f == "json") rc.format = RecordFormat::Json;
    else throw ConfigError(path + ".format: expected csv or json");
  }
  if (j.contains("method")) {
    const std::string m = get_string(j.at("method"), path + ".method");
    if (m != "acfgm") {
      try {
        rc.baseline = parse_baseline(m);
      } catch (const ConfigError& e) {
        throw ConfigError(path + ".method: " + e.what());
      }
    }
  }
  if (j.contains("baseline")) {
    const json& b = j.at("baseline");
    const std::string bp = path + ".baseline";
    check_keys(b, {"known_l", "batch_scale", "theta", "batch", "record_every"}, bp);
    read_opt(b, "known_l", bp, rc.baseline_params.known_l);
    read_opt(b, "batch_scale", bp, rc.baseline_params.batch_scale);
    read_opt(b, "theta", bp, rc.baseline_params.sgd_theta);
    read_opt(b, "batch", bp, rc.baseline_params.sgd_batch);
    read_opt(b, "record_every", bp, rc.baseline_params.record_every);
  }
  if (j.contains("options")) {
    const json& o = j.at("options");
    const std::string op = path + ".options";
    check_keys(o, {"record_timing", "log_reduced_grad", "track_exact"}, op);
    read_opt(o, "record_timing", op, rc.options.record_timing);
    read_opt(o, "log_reduced_grad", op, rc.options.log_reduced_grad);
    read_opt(o, "track_exact", op, rc.options.track_exact);
  }
  validate_run_config(rc, path);
  return rc;
}

inline json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file '" + file + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(file + ": " + e.what());
  }
}

/// {"problem": ..., "seeds": [...], "budget_axis": "iterations"|"calls",
///  "runs": [{"label": ..., "config": {...}}, ...]}. Top-level problem and
/// seeds apply to every run; runs may not override them.
inline ExperimentMatrix parse_matrix(const json& j, const std::string& path = "matrix") {
  using namespace config_detail;
  check_keys(j, {"problem", "seeds", "budget_axis", "runs", "outputs"}, path);
  ExperimentMatrix m;
  read_opt(j, "outputs", path, m.outputs);
  if (j.contains("budget_axis")) {
    const std::string a = get_string(j.at("budget_axis"), path + ".budget_axis");
    if (a == "iterations") m.budget_axis = ExperimentMatrix::Axis::Iterations;
    else if (a == "calls") m.budget_axis = ExperimentMatrix::Axis::Calls;
    else throw ConfigError(path + ".budget_axis: expected iterations or calls");
  }
  const json& runs = need(j, "runs", path);
  if (!runs.is_array() || runs.empty()) throw ConfigError(path + ".runs: expected a nonempty array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string rp = path + ".runs[" + std::to_string(i) + "]";
    const json& r = runs[i];
    check_keys(r, {"label", "config"}, rp);
    MatrixEntry e;
    e.label = get_string(need(r, "label", rp), rp + ".label");
    if (e.label.empty() || e.label.find_first_of(",\t\n") != std::string::npos)
      throw ConfigError(rp + ".label: must be nonempty without commas, tabs or newlines");
    if (!labels.insert(e.label).second) throw ConfigError(rp + ".label: duplicate label '" + e.label + "'");
    json cfg = r.contains("config") ? r.at("config") : json::object();
    if (cfg.contains("problem") || cfg.contains("seeds"))
      throw ConfigError(rp + ".config: problem and seeds are shared across the matrix; set them at the top level");
    if (j.contains("problem")) cfg["problem"] = j.at("problem");
    if (j.contains("seeds")) cfg["seeds"] = j.at("seeds");
    e.config = parse_run_config(cfg, rp + ".config");
    m.entries.push_back(std::move(e));
  }
  return m;
}

}  // namespace sacfgm
