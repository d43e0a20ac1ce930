#pragma once

// Executes run configs and experiment matrices, in parallel over cells.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "sacfgm/analysis.hpp"
#include "sacfgm/config.hpp"
#include "sacfgm/plotdata.hpp"
#include "sacfgm/records.hpp"

namespace sacfgm {

struct RunOutcome {
  std::uint64_t seed = 0;
  RunResult result;
  Summary summary;
};

/// STOCH_ACFGM_THREADS if set to a positive integer, else the hardware count.
inline unsigned thread_count() {
  if (const char* env = std::getenv("STOCH_ACFGM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Run `jobs` tasks on up to thread_count() workers. The first exception is
/// rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), jobs));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Resolve problem-dependent schedule fields.
inline ScheduleConfig resolve_schedule(const RunConfig& rc, const CompositeProblem& p) {
  ScheduleConfig s = rc.schedule;
  if (rc.d_tilde_from_start) {
    if (!p.optimum) throw ConfigError("config.schedule.d_tilde: initial_distance needs a problem with a known optimum");
    s.d_tilde = (p.x0 - p.optimum->x).norm();
    if (!(s.d_tilde > 0.0)) throw ConfigError("config.schedule.d_tilde: x0 coincides with the optimum");
  }
  return s;
}

inline RunOutcome execute_one(const RunConfig& rc, const CompositeProblem& p, std::uint64_t seed,
                              const StopRule& stop) {
  const ScheduleConfig cfg = resolve_schedule(rc, p);
  RunOutcome o;
  o.seed = seed;
  if (rc.baseline) {
    BaselineParams bp = rc.baseline_params;
    bp.schedule = cfg;
    if (*rc.baseline == BaselineKind::KnownL_AcceleratedMinibatch && bp.known_l <= 0.0)
      bp.known_l = p.f.max_smoothness();
    o.result = run_baseline(p, *rc.baseline, bp, stop, seed, rc.options);
  } else {
    o.result = run(p, cfg, stop, seed, rc.options);
  }
  o.summary = report_summary(o.result, cfg, seed, &p);
  if (rc.baseline) o.summary.variant = baseline_name(*rc.baseline);
  return o;
}

inline std::vector<RunOutcome> execute_config(const RunConfig& rc, const CompositeProblem& p) {
  std::vector<RunOutcome> out(rc.seeds.size());
  parallel_for(rc.seeds.size(), [&](std::size_t i) { out[i] = execute_one(rc, p, rc.seeds[i], rc.stop); });
  return out;
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + file.string() + "'");
  out << text;
}

inline std::string records_csv_string(const std::vector<TrajectoryRecord>& records) {
  std::ostringstream ss;
  write_records_csv(ss, records);
  return ss.str();
}

/// Per seed: records (csv or json), filtration.csv, summary.json, optional plot data.
inline void write_outcomes(const RunConfig& rc, const std::vector<RunOutcome>& outcomes,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& o : outcomes) {
    const std::string tag = "seed" + std::to_string(o.seed);
    if (rc.emit_csv || rc.format == RecordFormat::Json) {
      if (rc.format == RecordFormat::Csv)
        write_text(dir / ("records_" + tag + ".csv"), records_csv_string(o.result.records));
      else
        write_text(dir / ("records_" + tag + ".json"), records_to_json(o.result.records).dump(1) + "\n");
      std::ostringstream fl;
      o.result.filtration.write_csv(fl);
      write_text(dir / ("filtration_" + tag + ".csv"), fl.str());
    }
    if (rc.emit_json) write_text(dir / ("summary_" + tag + ".json"), summary_to_json(o.summary).dump(1) + "\n");
    if (rc.emit_plotdata) emit_plotdata(o.result.records, dir / ("plot_" + tag));
  }
}

struct LabeledOutcomes {
  std::string label;
  std::vector<RunOutcome> outcomes;
};

/// Runs every (label, seed) cell. With the calls axis, each seed of the
/// later entries stops at the oracle budget the first entry spent on it.
inline std::vector<LabeledOutcomes> execute_matrix(const ExperimentMatrix& m) {
  require(!m.entries.empty(), "empty experiment matrix");
  const CompositeProblem p = build_problem(m.entries.front().config.problem);
  const auto& seeds = m.entries.front().config.seeds;
  std::vector<LabeledOutcomes> out(m.entries.size());
  for (std::size_t e = 0; e < m.entries.size(); ++e) out[e].label = m.entries[e].label;
  out[0].outcomes = execute_config(m.entries[0].config, p);

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t e = 1; e < m.entries.size(); ++e) {
    out[e].outcomes.resize(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) cells.emplace_back(e, s);
  }
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto [e, s] = cells[c];
    const RunConfig& rc = m.entries[e].config;
    StopRule stop = rc.stop;
    if (m.budget_axis == ExperimentMatrix::Axis::Calls)
      stop = StopRule::budget(std::max<std::uint64_t>(1, out[0].outcomes[s].result.filtration.total_calls()),
                              std::numeric_limits<std::uint64_t>::max() / 2);
    out[e].outcomes[s] = execute_one(rc, p, seeds[s], stop);
  });
  return out;
}

/// Long format keyed by (label, seed, k), sorted by that key.
inline std::string merged_csv(std::vector<LabeledOutcomes> all) {
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  std::ostringstream ss;
  ss << "label,seed," << kRecordColumns << '\n';
  for (auto& lo : all) {
    std::sort(lo.outcomes.begin(), lo.outcomes.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
    for (const auto& o : lo.outcomes) {
      std::ostringstream body;
      write_records_csv(body, o.result.records);
      std::istringstream lines(body.str());
      std::string line;
      std::getline(lines, line);  // header
      while (std::getline(lines, line)) ss << lo.label << ',' << o.seed << ',' << line << '\n';
    }
  }
  return ss.str();
}

}  // namespace sacfgm
