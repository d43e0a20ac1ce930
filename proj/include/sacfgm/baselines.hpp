#pragma once

// Reference methods emitting the same record schema as run().

#include <chrono>
#include <cmath>

#include "sacfgm/optimizer.hpp"

namespace sacfgm {

enum class BaselineKind { DeterministicACFGM, KnownL_AcceleratedMinibatch, PlainSGD };

inline const char* baseline_name(BaselineKind k) {
  switch (k) {
    case BaselineKind::DeterministicACFGM: return "deterministic_acfgm";
    case BaselineKind::KnownL_AcceleratedMinibatch: return "known_l";
    case BaselineKind::PlainSGD: return "plain_sgd";
  }
  return "?";
}

inline BaselineKind parse_baseline(const std::string& s) {
  if (s == "deterministic_acfgm") return BaselineKind::DeterministicACFGM;
  if (s == "known_l") return BaselineKind::KnownL_AcceleratedMinibatch;
  if (s == "plain_sgd") return BaselineKind::PlainSGD;
  throw ConfigError("baseline: unknown kind '" + s + "' (expected deterministic_acfgm, known_l or plain_sgd)");
}

struct BaselineParams {
  ScheduleConfig schedule;  // DeterministicACFGM stepsize rule; d_tilde and batch_cap for known_l
  double known_l = 0.0;     // known_l: smoothness constant; must be supplied
  double batch_scale = 1.0; // known_l: multiplier on N t^2 sigma^2 / (L^2 D-tilde^2)
  double sgd_theta = 0.0;   // plain_sgd: eta_k = theta / sqrt(k); 0 picks 1 / max_i L_i
  std::uint64_t sgd_batch = 1;
  std::uint64_t record_every = 1;  // known_l and plain_sgd keep every r-th record plus the last
};

namespace detail {

inline void finish_record(TrajectoryRecord& rec, const CompositeProblem& p, const DecisionVector& x,
                          const FiltrationLog& log, const RunOptions& opt,
                          std::chrono::steady_clock::time_point t0) {
  rec.calls_total = log.total_calls();
  if (p.optimum) rec.gap = evaluate_gap(p, x);
  if (opt.record_timing)
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline bool should_stop(const StopRule& stop, const TrajectoryRecord& rec, RunResult& res) {
  if (stop.kind == StopRule::Kind::TargetGap && rec.gap && *rec.gap <= stop.target_gap) {
    res.status = RunStatus::TargetReached;
    return true;
  }
  return rec.k == stop.iterations || (stop.kind == StopRule::Kind::MaxCalls && rec.calls_total >= stop.max_calls);
}

// Records are only materialized on the stride, on the last iteration and
// for target-gap stops (which need the gap every iteration).
inline bool keep_record(const StopRule& stop, std::uint64_t k, std::uint64_t calls, std::uint64_t every) {
  if (every <= 1 || stop.kind == StopRule::Kind::TargetGap || k % every == 0 || k == stop.iterations) return true;
  return stop.kind == StopRule::Kind::MaxCalls && calls >= stop.max_calls;
}

// Accelerated stochastic approximation with stepsize t/(4L), weights 2/(t+1)
// and batch growing like N t^2 sigma^2 / (L^2 D-tilde^2).
inline RunResult run_known_l(const CompositeProblem& p, const BaselineParams& bp, const StopRule& stop,
                             std::uint64_t seed, const RunOptions& opt) {
  require(bp.known_l > 0.0, "known_l baseline requires the smoothness constant L");
  require(bp.batch_scale >= 0.0, "known_l baseline requires batch_scale >= 0");
  p.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto m_total = static_cast<std::uint64_t>(p.f.size());
  const double L = bp.known_l;
  const double horizon = static_cast<double>(stop.iterations);
  const double dt = bp.schedule.d_tilde;
  RunResult res;
  DecisionVector x = p.x0, x_ag = p.x0;
  try {
    for (std::uint64_t t = 1; t <= stop.iterations; ++t) {
      const double td = static_cast<double>(t);
      const double alpha = 2.0 / (td + 1.0);
      const double step = td / (4.0 * L);
      const DecisionVector x_md = (1.0 - alpha) * x_ag + alpha * x;
      const double sigma_sq = exact_point_variance(p, x_md);
      const double raw = bp.batch_scale * horizon * td * td * sigma_sq / (L * L * dt * dt);
      const std::uint64_t m = ceil_batch(raw, bp.schedule, "known_l batch", t);
      const BatchDraw b = draw_batch(seed, StreamKind::MainUpdate, t, m, m_total, &res.filtration);
      const BatchGradStats g = batch_grad(p, x_md, b);
      x = prox(p.h, p.set, x - step * g.mean_grad, step);
      x_ag = (1.0 - alpha) * x_ag + alpha * x;
      if (!x_ag.allFinite()) throw NonFiniteIterate("non-finite iterate at iteration " + std::to_string(t));
      if (!keep_record(stop, t, res.filtration.total_calls(), bp.record_every)) continue;
      TrajectoryRecord rec;
      rec.k = t;
      rec.eta = step;
      rec.l_bar = L;
      rec.m = m;
      rec.sigma_sq = sigma_sq;
      finish_record(rec, p, x_ag, res.filtration, opt, t0);
      res.records.push_back(rec);
      if (should_stop(stop, rec, res)) break;
    }
  } catch (const BudgetExceeded& e) {
    res.status = RunStatus::BudgetExceeded;
    res.message = e.what();
  } catch (const NonFiniteIterate& e) {
    res.status = RunStatus::NonFinite;
    res.message = e.what();
  }
  res.x_final = x_ag;
  return res;
}

// Proximal SGD with eta_k = theta / sqrt(k); reports the running average.
inline RunResult run_plain_sgd(const CompositeProblem& p, const BaselineParams& bp, const StopRule& stop,
                               std::uint64_t seed, const RunOptions& opt) {
  require(bp.sgd_batch >= 1, "plain_sgd requires batch >= 1");
  p.validate();
  const double theta = bp.sgd_theta > 0.0 ? bp.sgd_theta : 1.0 / p.f.max_smoothness();
  const auto t0 = std::chrono::steady_clock::now();
  const auto m_total = static_cast<std::uint64_t>(p.f.size());
  RunResult res;
  DecisionVector x = p.x0;
  DecisionVector avg = p.x0;
  try {
    for (std::uint64_t k = 1; k <= stop.iterations; ++k) {
      const double eta = theta / std::sqrt(static_cast<double>(k));
      const BatchDraw b = draw_batch(seed, StreamKind::MainUpdate, k, bp.sgd_batch, m_total, &res.filtration);
      const BatchGradStats g = batch_grad(p, x, b);
      x = prox(p.h, p.set, x - eta * g.mean_grad, eta);
      avg += (x - avg) / static_cast<double>(k);
      if (!avg.allFinite()) throw NonFiniteIterate("non-finite iterate at iteration " + std::to_string(k));
      if (!keep_record(stop, k, res.filtration.total_calls(), bp.record_every)) continue;
      TrajectoryRecord rec;
      rec.k = k;
      rec.eta = eta;
      rec.m = bp.sgd_batch;
      finish_record(rec, p, avg, res.filtration, opt, t0);
      res.records.push_back(rec);
      if (should_stop(stop, rec, res)) break;
    }
  } catch (const NonFiniteIterate& e) {
    res.status = RunStatus::NonFinite;
    res.message = e.what();
  }
  res.x_final = avg;
  return res;
}

}  // namespace detail

inline RunResult run_baseline(const CompositeProblem& p, BaselineKind kind, const BaselineParams& params,
                              const StopRule& stop, std::uint64_t seed, const RunOptions& opt = {}) {
  require(stop.iterations >= 1, "stop rule needs at least one iteration");
  switch (kind) {
    case BaselineKind::DeterministicACFGM:
      return detail::run_loop(p, params.schedule, stop, seed, opt, detail::OracleMode::FullBatch);
    case BaselineKind::KnownL_AcceleratedMinibatch: return detail::run_known_l(p, params, stop, seed, opt);
    case BaselineKind::PlainSGD: return detail::run_plain_sgd(p, params, stop, seed, opt);
  }
  throw UnsupportedOperation("unknown baseline");
}

}  // namespace sacfgm
