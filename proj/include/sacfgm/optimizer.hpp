#pragma once

// The stochastic AC-FGM loop for all four regimes.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sacfgm/estimators.hpp"
#include "sacfgm/problem.hpp"
#include "sacfgm/sampling.hpp"
#include "sacfgm/schedule.hpp"

namespace sacfgm {

/// One row of the trajectory. The first block is what the CSV carries; the
/// rest is kept in memory for verification.
struct TrajectoryRecord {
  std::uint64_t k = 0;
  std::optional<double> gap;  // Psi(x_k) - Psi*, when the optimum is known
  double eta = 0.0;           // eta_k
  double l_bar = 0.0;         // L-bar_k
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  std::uint64_t r = 0;
  std::uint64_t calls_total = 0;
  double sigma_sq = 0.0;  // sigma^2_{k-1} fed to m_k and n_k
  double v = 0.0;         // v^max_{k-1} fed to n_k
  std::optional<double> red_grad;
  double wall_ms = 0.0;

  double delta_sq = 0.0;        // delta^2_k fed to n_k
  double v_k = 0.0;             // smoothness variance (or its estimate) on (x_{k-1}, x_k)
  double v_max = 0.0;           // v^max_k
  double sigma_next_sq = 0.0;   // sigma^2_k, feeds m_{k+1}
  double l_hat = 0.0;           // L-hat_k
  double eta_next = 0.0;        // eta_{k+1}
  bool lower_bound_ok = true;   // eta_k against L-hat_{k-1}
  bool upper_caps_ok = true;    // eta_{k+1} against eta_k and L-bar_k

  // Exact counterparts of the Variant C estimates (only with track_exact).
  std::optional<double> exact_sigma_next_sq;
  std::optional<double> exact_delta_sq;
  std::optional<double> exact_v_k;
};

struct StopRule {
  enum class Kind { Iterations, TargetGap, MaxCalls };
  Kind kind = Kind::Iterations;
  std::uint64_t iterations = 0;
  double target_gap = 0.0;
  std::uint64_t max_calls = 0;

  static StopRule after(std::uint64_t n) { return {Kind::Iterations, n, 0.0, 0}; }
  /// Stops once the verification-side gap drops to eps; harness-only.
  static StopRule target(double eps, std::uint64_t max_iterations) {
    return {Kind::TargetGap, max_iterations, eps, 0};
  }
  static StopRule budget(std::uint64_t max_calls, std::uint64_t max_iterations) {
    return {Kind::MaxCalls, max_iterations, 0.0, max_calls};
  }
};

struct RunOptions {
  bool record_timing = true;     // wall_ms; off gives byte-identical replays
  bool log_reduced_grad = false; // full-gradient stationarity measure per iteration
  bool track_exact = false;      // exact variances next to the Variant C estimates
};

enum class RunStatus { Completed, TargetReached, BudgetExceeded, NonFinite };

inline const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::TargetReached: return "target_reached";
    case RunStatus::BudgetExceeded: return "budget_exceeded";
    case RunStatus::NonFinite: return "non_finite";
  }
  return "?";
}

struct IterState {
  DecisionVector x, y, z, y0;
  ScheduleState schedule;
  FiltrationLog filtration;
  std::vector<TrajectoryRecord> records;
};

struct RunResult {
  DecisionVector x_final;
  std::vector<TrajectoryRecord> records;
  FiltrationLog filtration;
  RunStatus status = RunStatus::Completed;
  std::string message;
  std::vector<std::string> warnings;
  std::uint64_t calls_init = 0;     // oracle calls spent before iteration 1
  double sigma0_sq = 0.0;           // sigma^2_0 as used by m_1
  std::optional<double> exact_sigma0_sq;
  std::vector<DecisionVector> y_path;  // y_k, only with track_exact
  std::vector<DecisionVector> z_path;  // z_k, only with track_exact
  std::vector<DecisionVector> x_path;  // x_k, only with track_exact

  bool ok() const { return status == RunStatus::Completed || status == RunStatus::TargetReached; }
};

/// Psi(x) - Psi*, with the full finite sum. Verification-side.
inline double evaluate_gap(const CompositeProblem& p, const DecisionVector& x) {
  if (!p.optimum) throw UnsupportedOperation("evaluate_gap requires a known optimum");
  return p.psi(x) - p.optimum->psi_star;
}

namespace detail {

enum class OracleMode { Sampled, FullBatch };

inline BatchDraw full_batch(const CompositeProblem& p, StreamKind kind, std::uint64_t k, FiltrationLog& log) {
  BatchDraw b;
  b.kind = kind;
  b.iteration = k;
  const auto all = p.f.all_indices();
  b.indices.assign(all.begin(), all.end());
  log.append(k, kind, b.indices.size());
  return b;
}

inline RunResult run_loop(const CompositeProblem& p, const ScheduleConfig& cfg, const StopRule& stop,
                          std::uint64_t seed, const RunOptions& opt, OracleMode mode) {
  validate(cfg);
  p.validate();
  require(stop.iterations >= 1, "stop rule needs at least one iteration");
  if (stop.kind == StopRule::Kind::TargetGap) require(p.optimum.has_value(), "target-gap stop needs a known optimum");
  if (stop.kind == StopRule::Kind::MaxCalls) require(stop.max_calls >= 1, "budget stop needs max_calls >= 1");

  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  const bool variant_c = cfg.variant == Variant::C_VarianceAdaptive && mode == OracleMode::Sampled;
  const double proxy = cfg.variant == Variant::HP_HighProbability ? cfg.hp_proxy_factor : 1.0;
  const auto m_total = static_cast<std::uint64_t>(p.f.size());
  const bool full = mode == OracleMode::FullBatch;

  RunResult res;
  IterState st;
  st.x = p.x0;
  st.y = p.x0;
  st.y0 = p.x0;
  st.z = p.x0;
  st.schedule = initial_state(cfg);

  auto exact_var = [&](const DecisionVector& x) { return full ? 0.0 : proxy * exact_point_variance(p, x); };
  auto exact_smooth_var = [&](const DecisionVector& a, const DecisionVector& b) {
    return full ? 0.0 : proxy * exact_smoothness_variance(p, a, b);
  };

  double sigma_prev_sq = 0.0;
  try {
    if (variant_c) {
      const std::uint64_t r0 = pair_count(cfg, 0);
      const BatchDraw b = draw_batch(seed, StreamKind::VarTaylor, 0, 2 * r0, m_total, &st.filtration);
      sigma_prev_sq = pairwise_grad_variance(p, st.x, b, cfg.inflation);
      res.calls_init = 2 * r0;
      if (opt.track_exact) res.exact_sigma0_sq = exact_point_variance(p, st.x);
    } else {
      sigma_prev_sq = exact_var(st.x);
    }
    res.sigma0_sq = sigma_prev_sq;

    std::uint64_t m_k = full ? m_total : batch_size_main(cfg, st.schedule.eta, sigma_prev_sq, 1);
    double l_bar_prev = 0.0;
    DecisionVector x_prev;

    for (std::uint64_t k = 1; k <= stop.iterations; ++k) {
      ScheduleState& sch = st.schedule;
      sch.k = k;
      TrajectoryRecord rec;
      rec.k = k;
      rec.eta = sch.eta;
      rec.m = m_k;
      rec.sigma_sq = sigma_prev_sq;
      rec.v = sch.v_max;
      rec.lower_bound_ok = stepsize_lower_bound_check(cfg, sch);
      if (opt.log_reduced_grad)
        rec.red_grad = gradient_mapping(p, st.y, p.f.full_grad(st.x), sch.eta).reduced_grad.norm();

      // Main update.
      const BatchDraw main = full ? full_batch(p, StreamKind::MainUpdate, k, st.filtration)
                                  : draw_batch(seed, StreamKind::MainUpdate, k, m_k, m_total, &st.filtration);
      const BatchGradStats g = batch_grad(p, st.x, main);
      x_prev = st.x;
      st.z = prox_step(p, g.mean_grad, st.y, st.y0, sch.eta, gamma_k(cfg, k));
      const double tau = tau_k(cfg, k);
      const double bk = beta_k(cfg, k);
      st.x = (st.z + tau * x_prev) / (1.0 + tau);
      st.y = (1.0 - bk) * st.y + bk * st.z;
      if (!st.x.allFinite() || !st.y.allFinite() || !st.z.allFinite())
        throw NonFiniteIterate("non-finite iterate at iteration " + std::to_string(k));

      // Variance at x_k ahead of the step batches.
      const std::uint64_t r_k = variant_c ? pair_count(cfg, k) : 0;
      rec.r = r_k;
      double delta_sq;
      if (variant_c) {
        const BatchDraw vb = draw_batch(seed, StreamKind::VarMain, k, 2 * r_k, m_total, &st.filtration);
        delta_sq = pairwise_grad_variance(p, st.x, vb, cfg.inflation);
      } else {
        delta_sq = exact_var(st.x);
      }
      rec.delta_sq = delta_sq;

      const std::uint64_t n_k =
          full ? m_total : batch_size_step(cfg, sch.eta, sch.v_max, sigma_prev_sq, delta_sq, k);
      rec.n = n_k;

      // Gradient-difference stage.
      const BatchDraw gd = full ? full_batch(p, StreamKind::StepGradDiff, k, st.filtration)
                                : draw_batch(seed, StreamKind::StepGradDiff, k, n_k, m_total, &st.filtration);
      const DecisionVector delta_g = grad_diff(p, x_prev, st.x, gd);
      double v_k;
      if (variant_c) {
        const BatchDraw vb = draw_batch(seed, StreamKind::VarGradDiff, k, 2 * r_k, m_total, &st.filtration);
        v_k = pairwise_smoothness_variance(p, x_prev, st.x, vb, cfg.inflation);
      } else {
        v_k = exact_smooth_var(x_prev, st.x);
      }
      rec.v_k = v_k;

      // Taylor stage.
      const BatchDraw tb = full ? full_batch(p, StreamKind::StepTaylor, k, st.filtration)
                                : draw_batch(seed, StreamKind::StepTaylor, k, n_k, m_total, &st.filtration);
      const double T = taylor_remainder(p, x_prev, st.x, tb);
      double sigma_k_sq;
      if (variant_c) {
        const BatchDraw vb = draw_batch(seed, StreamKind::VarTaylor, k, 2 * r_k, m_total, &st.filtration);
        sigma_k_sq = pairwise_grad_variance(p, st.x, vb, cfg.inflation);
      } else {
        sigma_k_sq = delta_sq;  // both are the point variance at x_k
      }
      rec.sigma_next_sq = sigma_k_sq;
      if (variant_c && opt.track_exact) {
        const double ex = exact_point_variance(p, st.x);
        rec.exact_sigma_next_sq = ex;
        rec.exact_delta_sq = ex;
        rec.exact_v_k = exact_smoothness_variance(p, x_prev, st.x);
      }

      const LocalSmoothness ls = local_smoothness_detail(delta_g, T, g.mean_grad.norm());
      double l_bar = ls.value;
      if (ls.status == SmoothnessStatus::Degenerate) {
        l_bar = l_bar_prev;
        res.warnings.push_back("iteration " + std::to_string(k) +
                               ": Taylor remainder vanished with a nonzero gradient difference; kept previous L-bar");
      }
      rec.l_bar = l_bar;

      sch.v_max = std::max(sch.v_max, v_k);
      rec.v_max = sch.v_max;
      const double eta_next = next_stepsize(cfg, k, sch.eta, l_bar);
      rec.eta_next = eta_next;
      rec.upper_caps_ok = stepsize_upper_caps_hold(cfg, k, sch.eta, eta_next, l_bar);
      sch.l_hat = std::max(sch.l_hat, l_bar);
      rec.l_hat = sch.l_hat;
      rec.calls_total = st.filtration.total_calls();
      if (p.optimum) rec.gap = evaluate_gap(p, st.x);
      if (opt.record_timing)
        rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t_start).count();
      if (opt.track_exact) {
        res.x_path.push_back(st.x);
        res.y_path.push_back(st.y);
        res.z_path.push_back(st.z);
      }
      st.records.push_back(rec);

      if (stop.kind == StopRule::Kind::TargetGap && rec.gap && *rec.gap <= stop.target_gap) {
        res.status = RunStatus::TargetReached;
        break;
      }
      if (stop.kind == StopRule::Kind::MaxCalls && rec.calls_total >= stop.max_calls) break;
      if (k == stop.iterations) break;

      l_bar_prev = l_bar;
      sigma_prev_sq = sigma_k_sq;
      sch.eta = eta_next;
      m_k = full ? m_total : batch_size_main(cfg, eta_next, sigma_prev_sq, k + 1);
    }
  } catch (const BudgetExceeded& e) {
    res.status = RunStatus::BudgetExceeded;
    res.message = e.what();
  } catch (const NonFiniteIterate& e) {
    res.status = RunStatus::NonFinite;
    res.message = e.what();
  }
  res.x_final = st.x;
  res.records = std::move(st.records);
  res.filtration = std::move(st.filtration);
  return res;
}

}  // namespace detail

/// Run the method on `p`. Budget overruns and non-finite iterates end the run
/// early with the records gathered so far; see RunResult::status.
inline RunResult run(const CompositeProblem& p, const ScheduleConfig& cfg, const StopRule& stop, std::uint64_t seed,
                     const RunOptions& opt = {}) {
  return detail::run_loop(p, cfg, stop, seed, opt, detail::OracleMode::Sampled);
}

}  // namespace sacfgm
