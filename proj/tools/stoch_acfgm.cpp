// Command-line harness: run, compare, verify, gen-problem.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sacfgm/acceptance.hpp"
#include "sacfgm/sacfgm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sacfgm;

namespace {

constexpr int kExitAcceptance = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitNonFinite = 4;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> variant;
  std::optional<double> beta, eta1, dtilde, lambda;
  std::optional<std::uint64_t> n;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--seed", o.seed, "Sampling seed (replaces the seed list)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--variant", o.variant, "Schedule variant")->check(CLI::IsMember({"a", "b", "c", "hp"}));
  cmd->add_option("--beta", o.beta, "Averaging weight beta");
  cmd->add_option("--eta1", o.eta1, "Initial stepsize");
  cmd->add_option("--dtilde", o.dtilde, "Distance scale D-tilde");
  cmd->add_option("--n", o.n, "Horizon / iteration count");
  cmd->add_option("--lambda", o.lambda, "High-probability constant");
  cmd->add_option("--format", o.format, "Record format")->check(CLI::IsMember({"csv", "json"}));
}

json base_run_config(const Overrides& o) {
  json cfg = o.config.empty() ? json::object() : read_json_file(o.config);
  if (!cfg.is_object()) throw ConfigError("config: expected a JSON object");
  if (!cfg.contains("schedule")) cfg["schedule"] = json::object();
  json& s = cfg["schedule"];
  if (!s.is_object()) throw ConfigError("config.schedule: expected an object");
  if (!s.contains("d_tilde") && !o.dtilde) s["d_tilde"] = "initial_distance";
  if (o.variant) s["variant"] = *o.variant;
  // Variants B, C and HP need beta strictly below 1/8.
  if (!s.contains("beta") && !o.beta && s.value("variant", std::string("a")) != "a") s["beta"] = 0.12;
  if (o.beta) s["beta"] = *o.beta;
  if (o.eta1) s["eta1"] = *o.eta1;
  if (o.dtilde) s["d_tilde"] = *o.dtilde;
  if (o.lambda) s["lambda"] = *o.lambda;
  if (o.n) {
    if (s.value("variant", std::string("a")) == "a") s["n"] = *o.n;
    if (!cfg.contains("stop") || cfg["stop"].contains("iterations")) cfg["stop"] = json{{"iterations", *o.n}};
  }
  if (o.seed) cfg["seeds"] = json::array({*o.seed});
  if (o.out) cfg["outputs"] = *o.out;
  if (o.format) cfg["format"] = *o.format;
  return cfg;
}

int status_exit(const std::vector<RunOutcome>& outcomes) {
  int code = 0;
  for (const auto& oc : outcomes) {
    if (oc.result.status == RunStatus::BudgetExceeded) code = std::max(code, kExitBudget);
    if (oc.result.status == RunStatus::NonFinite) code = std::max(code, kExitNonFinite);
  }
  return code;
}

void print_outcome(const std::string& label, const RunOutcome& oc) {
  const auto& recs = oc.result.records;
  std::cout << (label.empty() ? "" : label + " ") << "seed " << oc.seed << ": " << status_name(oc.result.status)
            << ", iterations " << (recs.empty() ? 0 : recs.back().k) << ", calls " << oc.result.filtration.total_calls();
  if (!recs.empty() && recs.back().gap) std::cout << ", final gap " << fmt_double(*recs.back().gap);
  std::cout << '\n';
  if (!oc.result.message.empty()) std::cerr << "  " << oc.result.message << '\n';
  for (const auto& w : oc.result.warnings) std::cerr << "  warning: " << w << '\n';
}

int cmd_run(const Overrides& o) {
  const RunConfig rc = parse_run_config(base_run_config(o));
  const CompositeProblem p = build_problem(rc.problem);
  const auto outcomes = execute_config(rc, p);
  write_outcomes(rc, outcomes, rc.outputs);
  for (const auto& oc : outcomes) print_outcome("", oc);
  std::cout << "outputs written to " << rc.outputs << '\n';
  return status_exit(outcomes);
}

int cmd_compare(const Overrides& o) {
  if (o.config.empty()) throw ConfigError("compare: --config with an experiment matrix is required");
  json j = read_json_file(o.config);
  if (o.out) j["outputs"] = *o.out;
  if (o.seed) j["seeds"] = json::array({*o.seed});
  const ExperimentMatrix m = parse_matrix(j);
  const auto all = execute_matrix(m);
  const fs::path dir = m.outputs;
  fs::create_directories(dir);
  write_text(dir / "merged.csv", merged_csv(all));

  json summaries = json::array();
  std::vector<LabeledSeries> series;
  int code = 0;
  for (const auto& lo : all) {
    std::vector<std::vector<TrajectoryRecord>> runs;
    for (const auto& oc : lo.outcomes) {
      json s = summary_to_json(oc.summary);
      s["label"] = lo.label;
      summaries.push_back(s);
      runs.push_back(oc.result.records);
      print_outcome(lo.label, oc);
    }
    series.push_back({lo.label, average_over_seeds(runs)});
    code = std::max(code, status_exit(lo.outcomes));
  }
  write_text(dir / "summaries.json", summaries.dump(1) + "\n");
  emit_plotdata(series, dir / "plot");
  std::cout << "merged CSV written to " << (dir / "merged.csv").string() << '\n';
  return code;
}

int cmd_verify() {
  acceptance::Suite suite;
  const auto results = suite.run_all();
  int failed = 0;
  for (const auto& r : results) {
    std::cout << acceptance::format_line(r) << std::endl;
    failed += !r.pass;
  }
  std::cout << results.size() - static_cast<std::size_t>(failed) << " of " << results.size() << " criteria passed\n";
  return failed ? kExitAcceptance : 0;
}

int cmd_gen_problem(const Overrides& o) {
  json spec = o.config.empty() ? default_problem_spec() : read_json_file(o.config);
  if (spec.is_object() && spec.contains("problem")) spec = spec.at("problem");
  if (o.seed) spec["seed"] = *o.seed;
  const CompositeProblem p = build_problem(spec);
  const std::string file = o.out.value_or("problem.json");
  if (fs::path(file).has_parent_path()) fs::create_directories(fs::path(file).parent_path());
  save_problem(p, file);
  std::cout << "wrote " << p.name << " (" << p.f.size() << " components, dim " << p.dim() << ") to " << file << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic AC-FGM runner"};
  app.require_subcommand(1);
  Overrides run_o, cmp_o, gen_o;
  auto* run_cmd = app.add_subcommand("run", "Run one configuration over its seeds");
  add_common(run_cmd, run_o);
  auto* cmp_cmd = app.add_subcommand("compare", "Run an experiment matrix and merge the trajectories");
  add_common(cmp_cmd, cmp_o);
  auto* ver_cmd = app.add_subcommand("verify", "Run the acceptance suite");
  auto* gen_cmd = app.add_subcommand("gen-problem", "Write a problem file from a generator spec");
  add_common(gen_cmd, gen_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run_o);
    if (*cmp_cmd) return cmd_compare(cmp_o);
    if (*ver_cmd) return cmd_verify();
    if (*gen_cmd) return cmd_gen_problem(gen_o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAcceptance;
  }
  return 0;
}
