#pragma once

// Acceptance suite: one PASS/FAIL verdict per criterion, with measured values.
// Shared by `stoch_acfgm verify` and the acceptance test binary.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sacfgm/analysis.hpp"
#include "sacfgm/baselines.hpp"
#include "sacfgm/generators.hpp"
#include "sacfgm/records.hpp"

namespace sacfgm::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;
  double runtime_ms = 0.0;
};

// ---------------------------------------------------------------------------
// Problems

inline CompositeProblem deterministic_quadratic() {
  QuadraticSpec s;
  s.dim = 20;
  s.components = 1;
  s.condition = 100.0;
  s.max_curvature = 1.0;
  s.noise = 0.0;
  s.seed = 7;
  return make_quadratic(s);
}

inline QuadraticSpec stochastic_quadratic_spec() {
  QuadraticSpec s;
  s.dim = 10;
  s.components = 200;
  s.condition = 100.0;
  s.max_curvature = 0.1;
  s.noise = 0.1;
  s.seed = 12;
  return s;
}

inline CompositeProblem stochastic_quadratic() { return make_quadratic(stochastic_quadratic_spec()); }

inline CompositeProblem heterogeneous_least_squares() {
  LeastSquaresSpec s;
  s.dim = 5;
  s.components = 50;
  s.heterogeneity = 1.0;
  s.seed = 3;
  return make_least_squares(s);
}

inline CompositeProblem spread_quadratic() {
  QuadraticSpec s;
  s.dim = 5;
  s.components = 50;
  s.condition = 10.0;
  s.curvature_spread = 0.8;
  s.seed = 5;
  return make_quadratic(s);
}

// ---------------------------------------------------------------------------
// Numeric oracle for the prox subproblem
//   argmin_{z in X, z in S} <g, z> + w ||z||_1 + 1/(2 eta) ||y - z||^2 + gamma/(2 eta) ||y0 - z||^2
// solved coordinatewise by bisection on the subgradient, with an outer
// bisection on the multiplier of a ball constraint.

struct ProxInstance {
  ProxTerm h;
  FeasibleSet set;
  DecisionVector g, y, y0;
  double eta = 1.0;
  double gamma = 0.0;
};

namespace oracle {

// Minimizer of a convex 1-D function on [lo, hi] given its one-sided
// derivatives, by bisection on the sign change of the subgradient.
inline double subgradient_root(const std::function<double(double)>& left, const std::function<double(double)>& right,
                               double lo, double hi) {
  if (right(lo) >= 0.0) return lo;
  if (left(hi) <= 0.0) return hi;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (right(mid) < 0.0) lo = mid;
    else if (left(mid) > 0.0) hi = mid;
    else return mid;
  }
  return 0.5 * (lo + hi);
}

struct Constraints {
  DecisionVector lo, hi;  // box part (possibly infinite)
  const Ball* ball = nullptr;
};

inline void add_set(Constraints& c, const FeasibleSet& s) {
  if (const auto* b = std::get_if<Box>(&s)) {
    c.lo = c.lo.cwiseMax(b->lower);
    c.hi = c.hi.cwiseMin(b->upper);
  } else if (const auto* ball = std::get_if<Ball>(&s)) {
    c.ball = ball;
  }
}

/// Coordinatewise minimizer with ball multiplier mu.
inline DecisionVector solve_with_multiplier(const ProxInstance& in, const Constraints& c, double w, double mu) {
  const Eigen::Index n = in.y.size();
  DecisionVector z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double o = c.ball ? c.ball->center[i] : 0.0;
    auto smooth = [&](double v) {
      return in.g[i] + (v - in.y[i]) / in.eta + in.gamma * (v - in.y0[i]) / in.eta + mu * (v - o);
    };
    auto left = [&](double v) { return smooth(v) + (v > 0.0 ? w : -w); };
    auto right = [&](double v) { return smooth(v) + (v >= 0.0 ? w : -w); };
    const double span = std::abs(in.g[i]) * in.eta + w * in.eta + std::abs(in.y[i]) + std::abs(in.y0[i]) +
                        std::abs(o) + 1.0;
    const double lo = std::max(c.lo[i], -span);
    const double hi = std::min(c.hi[i], span);
    z[i] = subgradient_root(left, right, lo, hi);
  }
  return z;
}

inline DecisionVector solve(const ProxInstance& in) {
  const Eigen::Index n = in.y.size();
  Constraints c;
  c.lo = DecisionVector::Constant(n, -std::numeric_limits<double>::infinity());
  c.hi = DecisionVector::Constant(n, std::numeric_limits<double>::infinity());
  add_set(c, in.set);
  double w = 0.0;
  if (const auto* l1 = std::get_if<L1Term>(&in.h)) w = l1->weight;
  if (const auto* si = std::get_if<SetIndicatorTerm>(&in.h)) add_set(c, si->set);
  DecisionVector z = solve_with_multiplier(in, c, w, 0.0);
  if (!c.ball || (z - c.ball->center).norm() <= c.ball->radius) return z;
  double lo = 0.0, hi = 1.0;
  while ((solve_with_multiplier(in, c, w, hi) - c.ball->center).norm() > c.ball->radius) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((solve_with_multiplier(in, c, w, mid) - c.ball->center).norm() > c.ball->radius) lo = mid;
    else hi = mid;
  }
  return solve_with_multiplier(in, c, w, hi);
}

}  // namespace oracle

inline ProxInstance random_prox_instance(int kind, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim_d(1, 6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  const Eigen::Index n = dim_d(rng);
  auto vec = [&] {
    DecisionVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
    return v;
  };
  auto box = [&] {
    DecisionVector a = vec(), b = vec();
    Box bx{a.cwiseMin(b), a.cwiseMax(b)};
    bx.upper += DecisionVector::Constant(n, 0.05);
    return bx;
  };
  auto ball = [&] { return Ball{vec() * 0.5, pos(rng)}; };
  auto any_set = [&]() -> FeasibleSet {
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
      case 0: return FullSpace{};
      case 1: return box();
      default: return ball();
    }
  };
  ProxInstance in;
  in.g = vec();
  in.y = vec();
  in.y0 = vec();
  in.eta = pos(rng);
  in.gamma = std::uniform_int_distribution<int>(0, 1)(rng) ? 0.0 : pos(rng);
  if (kind == 0) {
    in.h = ZeroTerm{};
    in.set = any_set();
  } else if (kind == 1) {
    in.h = L1Term{pos(rng)};
    in.set = any_set();
  } else {
    // Supported intersections: FullSpace with anything, Box with Box.
    if (std::uniform_int_distribution<int>(0, 1)(rng)) {
      in.set = FullSpace{};
      in.h = SetIndicatorTerm{std::uniform_int_distribution<int>(0, 1)(rng) ? FeasibleSet{box()} : FeasibleSet{ball()}};
    } else {
      // Partially overlapping boxes.
      const Box outer = box();
      Box inner = outer;
      std::uniform_real_distribution<double> frac(0.2, 1.5);
      for (Eigen::Index i = 0; i < n; ++i) {
        inner.lower[i] = outer.lower[i] - pos(rng);
        inner.upper[i] = outer.lower[i] + frac(rng) * (outer.upper[i] - outer.lower[i]);
      }
      in.set = outer;
      in.h = SetIndicatorTerm{inner};
    }
  }
  return in;
}

// ---------------------------------------------------------------------------
// Trajectory checks recomputed from the records (independent of the flags the
// optimizer stores).

inline std::size_t count_lower_bound_violations(const std::vector<TrajectoryRecord>& recs,
                                                const ScheduleConfig& cfg) {
  const bool a = cfg.variant == Variant::A_FixedHorizon;
  double l_hat = 1.0 / ((a ? 32.0 : 64.0) * (1.0 - cfg.beta) * cfg.eta1);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const double k = static_cast<double>(recs[i].k);
    if (recs[i].k >= 2) {
      const double bound = (a ? 1.0 : 15.0 / 16.0) * k / (32.0 * l_hat);
      if (recs[i].eta < bound * (1.0 - 1e-12)) ++bad;
    }
    l_hat = std::max(l_hat, recs[i].l_bar);
  }
  return bad;
}

inline std::size_t count_upper_cap_violations(const std::vector<TrajectoryRecord>& recs, const ScheduleConfig& cfg) {
  const bool a = cfg.variant == Variant::A_FixedHorizon;
  std::size_t bad = 0;
  for (const auto& r : recs) {
    const double k = static_cast<double>(r.k);
    const double next = r.eta_next;
    if (r.k >= 2) {
      const double cap = a ? (k + 1.0) / k * r.eta : k * (k + 3.0 - cfg.beta) / ((k + 1.0) * (k + 1.0)) * r.eta;
      if (next > cap * (1.0 + 1e-12)) ++bad;
    }
    if (r.l_bar > 0.0 && next * r.l_bar > k / 16.0 * (1.0 + 1e-12)) ++bad;
  }
  for (std::size_t i = 0; i + 1 < recs.size(); ++i)
    if (recs[i + 1].eta != recs[i].eta_next) ++bad;
  return bad;
}

inline double recompute_r_n_sq(const std::vector<TrajectoryRecord>& recs, const ScheduleConfig& cfg) {
  if (recs.empty()) return 0.0;
  const double seed_l = 1.0 / ((cfg.variant == Variant::A_FixedHorizon ? 32.0 : 64.0) * (1.0 - cfg.beta) * cfg.eta1);
  double prev = seed_l, total = 0.0;
  for (const auto& r : recs) {
    if (prev != 0.0) total += (r.v * cfg.d_tilde * cfg.d_tilde + r.delta_sq + r.sigma_sq) / (prev * prev);
    prev = r.l_bar;
  }
  return total / static_cast<double>(recs.size());
}

// ---------------------------------------------------------------------------

struct TrackedRun {
  std::string label;
  ScheduleConfig cfg;
  std::uint64_t seed = 0;
  bool adaptive = true;  // run() or the deterministic baseline; both obey m + 2n (+ 6r) accounting
  std::shared_ptr<const CompositeProblem> problem;
  StopRule stop;
  RunResult result;
};

struct SuiteOptions {
  bool verbose = false;
};

class Suite {
 public:
  explicit Suite(SuiteOptions opt = {}) : opt_(opt) {}

  std::vector<CriterionResult> run_all() {
    std::map<int, CriterionResult> out;
    auto timed = [&](int id, const std::string& name, const std::function<void(CriterionResult&)>& body) {
      CriterionResult r;
      r.id = id;
      r.name = name;
      const auto t0 = std::chrono::steady_clock::now();
      body(r);
      r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      out[id] = r;
    };
    timed(1, "deterministic O(1/N^2) recovery", [&](CriterionResult& r) { criterion_1(r); });
    timed(4, "local smoothness bound", [&](CriterionResult& r) { criterion_4(r); });
    timed(5, "prox oracle equivalence", [&](CriterionResult& r) { criterion_5(r); });
    timed(6, "pairwise estimator unbiasedness", [&](CriterionResult& r) { criterion_6(r); });
    timed(7, "stochastic rate scaling", [&](CriterionResult& r) { criterion_7(r); });
    timed(8, "scale invariance", [&](CriterionResult& r) { criterion_8(r); });
    timed(9, "horizon-free variant", [&](CriterionResult& r) { criterion_9(r); });
    timed(10, "variance-adaptive coverage", [&](CriterionResult& r) { criterion_10(r); });
    timed(12, "baseline sanity", [&](CriterionResult& r) { criterion_12(r); });
    run_high_probability_set();
    timed(2, "stepsize lower bound", [&](CriterionResult& r) { criterion_2(r); });
    timed(3, "stepsize upper caps", [&](CriterionResult& r) { criterion_3(r); });
    timed(11, "oracle-call accounting", [&](CriterionResult& r) { criterion_11(r); });
    timed(13, "replay determinism", [&](CriterionResult& r) { criterion_13(r); });
    std::vector<CriterionResult> v;
    for (auto& [id, r] : out) v.push_back(r);
    return v;
  }

  const std::vector<TrackedRun>& runs() const { return runs_; }

 private:
  SuiteOptions opt_;
  std::vector<TrackedRun> runs_;
  std::shared_ptr<const CompositeProblem> det_, stoch_, scaled_;
  std::map<std::uint64_t, RunResult> a60_;  // criterion 7 runs at N = 60, by seed
  double a60_mean_gap_ = 0.0;

  static constexpr int kSeeds = 20;
  static constexpr std::uint64_t kSeedBase = 100;

  static RunOptions quiet() {
    RunOptions o;
    o.record_timing = false;
    return o;
  }

  const RunResult& track(const std::string& label, std::shared_ptr<const CompositeProblem> p,
                         const ScheduleConfig& cfg, const StopRule& stop, std::uint64_t seed, bool deterministic,
                         const RunOptions& o = quiet()) {
    TrackedRun t;
    t.label = label;
    t.cfg = cfg;
    t.seed = seed;
    t.problem = p;
    t.stop = stop;
    if (deterministic) {
      BaselineParams bp;
      bp.schedule = cfg;
      t.result = run_baseline(*p, BaselineKind::DeterministicACFGM, bp, stop, seed, o);
    } else {
      t.result = run(*p, cfg, stop, seed, o);
    }
    runs_.push_back(std::move(t));
    return runs_.back().result;
  }

  std::shared_ptr<const CompositeProblem> det() {
    if (!det_) det_ = std::make_shared<const CompositeProblem>(deterministic_quadratic());
    return det_;
  }
  std::shared_ptr<const CompositeProblem> stoch() {
    if (!stoch_) stoch_ = std::make_shared<const CompositeProblem>(stochastic_quadratic());
    return stoch_;
  }
  double stoch_d_tilde() { return (stoch()->x0 - stoch()->optimum->x).norm(); }

  static std::string num(double v, int prec = 4) {
    std::ostringstream ss;
    ss << std::setprecision(prec) << v;
    return ss.str();
  }

  static double final_gap(const RunResult& r) {
    return r.records.empty() || !r.records.back().gap ? std::numeric_limits<double>::infinity() : *r.records.back().gap;
  }

  // 1. Noise-free quadratic, Variant A: gap(400)/gap(200) <= 0.35 and slope <= -1.8 in < 2 s.
  void deterministic_ratio(bool baseline, double& ratio, std::optional<double>& slope, bool& ok) {
    ScheduleConfig cfg;
    cfg.beta = 0.125;
    cfg.eta1 = 1.0;
    const std::string label = baseline ? "c12-deterministic" : "c1-variant-a";
    cfg.horizon = 200;
    const RunResult& r200 = track(label + "-n200", det(), cfg, StopRule::after(200), 1, baseline);
    const double g200 = final_gap(r200);
    ok = r200.ok();
    cfg.horizon = 400;
    const RunResult& r400 = track(label + "-n400", det(), cfg, StopRule::after(400), 1, baseline);
    ok = ok && r400.ok();
    ratio = final_gap(r400) / g200;
    slope = rate_fit(r400.records, 0.5).slope;
  }

  void criterion_1(CriterionResult& r) {
    const auto t0 = std::chrono::steady_clock::now();
    double ratio;
    std::optional<double> slope;
    bool ok;
    deterministic_ratio(false, ratio, slope, ok);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = ok && ratio <= 0.35 && slope && *slope <= -1.8 && secs < 2.0;
    r.measured = "gap ratio " + num(ratio) + " (<= 0.35), slope " + (slope ? num(*slope) : "n/a") +
                 " (<= -1.8), runtime " + num(secs, 3) + " s (< 2)";
  }

  // 4. Same-batch draws: L-bar <= max L_i (1 + 1e-6), clamped T >= 0, raw T >= -1e-10 scale.
  void criterion_4(CriterionResult& r) {
    const CompositeProblem p = heterogeneous_least_squares();
    const double l_max = p.f.max_smoothness();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_int_distribution<int> bsize(1, 50);
    double worst_ratio = 0.0, worst_t = 0.0;
    int bad = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      DecisionVector xp(p.dim()), xc(p.dim());
      const double spread = std::pow(10.0, std::uniform_real_distribution<double>(-6.0, 1.0)(rng));
      for (Eigen::Index i = 0; i < p.dim(); ++i) xp[i] = 2.0 * n01(rng);
      for (Eigen::Index i = 0; i < p.dim(); ++i) xc[i] = xp[i] + spread * n01(rng);
      const BatchDraw b = draw_batch(77, StreamKind::StepGradDiff, static_cast<std::uint64_t>(trial + 1),
                                     static_cast<std::uint64_t>(bsize(rng)), static_cast<std::uint64_t>(p.f.size()));
      const DecisionVector dg = p.f.mean_grad_diff(xp, xc, b.indices);
      const TaylorRemainder t = taylor_remainder_detail(p, xp, xc, b.indices);
      DecisionVector tmp;
      const double scale =
          std::max({1.0, std::abs(p.f.mean_value_grad(xp, b.indices, tmp)), std::abs(p.f.mean_value_grad(xc, b.indices, tmp))});
      const double lb = local_smoothness(dg, t.clamped, scale);
      worst_ratio = std::max(worst_ratio, lb / l_max);
      worst_t = std::min(worst_t, t.raw / scale);
      if (lb > l_max * (1.0 + 1e-6) || t.clamped < 0.0 || t.raw < -1e-10 * scale) ++bad;
    }
    r.pass = bad == 0;
    r.measured = "max L-bar / max L_i = " + num(worst_ratio, 10) + ", min raw T / scale = " + num(worst_t, 3) +
                 ", violations " + std::to_string(bad) + " of 10000";
  }

  // 5. Closed-form prox_step against the numeric oracle, 200 instances per kind, 1e-8, < 5 s.
  void criterion_5(CriterionResult& r) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(555);
    const char* names[] = {"zero", "l1", "set"};
    std::string detail;
    bool all_ok = true;
    for (int kind = 0; kind < 3; ++kind) {
      double worst = 0.0;
      for (int i = 0; i < 200; ++i) {
        const ProxInstance in = random_prox_instance(kind, rng);
        CompositeProblem p;
        p.h = in.h;
        p.set = in.set;
        const DecisionVector z = prox_step(p, in.g, in.y, in.y0, in.eta, in.gamma);
        const DecisionVector zo = oracle::solve(in);
        worst = std::max(worst, (z - zo).cwiseAbs().maxCoeff());
      }
      all_ok = all_ok && worst <= 1e-8;
      detail += std::string(detail.empty() ? "" : ", ") + names[kind] + " max err " + num(worst, 3);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = all_ok && secs < 5.0;
    r.measured = detail + " (<= 1e-8), runtime " + num(secs, 3) + " s (< 5)";
  }

  // 6. Mean of 1e5 pairwise terms within 2% of the exact variances.
  void criterion_6(CriterionResult& r) {
    const CompositeProblem ls = heterogeneous_least_squares();
    DecisionVector x = ls.x0;
    const BatchDraw bs = draw_batch(61, StreamKind::VarTaylor, 0, 200000, static_cast<std::uint64_t>(ls.f.size()));
    const double sigma_hat = pairwise_grad_variance(ls, x, bs, 1.0);
    const double sigma = exact_point_variance(ls, x);

    const CompositeProblem q = spread_quadratic();
    const DecisionVector xp = q.x0;
    const DecisionVector xc = q.optimum->x;
    const BatchDraw bv = draw_batch(62, StreamKind::VarGradDiff, 0, 200000, static_cast<std::uint64_t>(q.f.size()));
    const double v_hat = pairwise_smoothness_variance(q, xp, xc, bv, 1.0);
    const double v = exact_smoothness_variance(q, xp, xc);
    const double es = std::abs(sigma_hat / sigma - 1.0), ev = std::abs(v_hat / v - 1.0);
    r.pass = es <= 0.02 && ev <= 0.02;
    r.measured = "sigma-hat rel err " + num(es, 3) + ", v-hat rel err " + num(ev, 3) + " (<= 0.02)";
  }

  ScheduleConfig stoch_config(Variant v, std::optional<std::uint64_t> horizon) {
    ScheduleConfig cfg;
    cfg.variant = v;
    cfg.beta = v == Variant::A_FixedHorizon ? 0.125 : 0.12;
    cfg.eta1 = 1.0;
    cfg.d_tilde = stoch_d_tilde();
    cfg.horizon = horizon;
    return cfg;
  }

  // 7. Variant A, 20 seeds: mean gap(60) / mean gap(30) <= 0.5 in < 60 s.
  void criterion_7(CriterionResult& r) {
    const auto t0 = std::chrono::steady_clock::now();
    double g30 = 0.0, g60 = 0.0;
    bool ok = true;
    for (int s = 0; s < kSeeds; ++s) {
      const std::uint64_t seed = kSeedBase + static_cast<std::uint64_t>(s);
      const RunResult& r30 =
          track("c7-a-n30", stoch(), stoch_config(Variant::A_FixedHorizon, 30), StopRule::after(30), seed, false);
      ok = ok && r30.ok();
      g30 += final_gap(r30) / kSeeds;
      const RunResult& r60 =
          track("c7-a-n60", stoch(), stoch_config(Variant::A_FixedHorizon, 60), StopRule::after(60), seed, false);
      ok = ok && r60.ok();
      g60 += final_gap(r60) / kSeeds;
      a60_[seed] = r60;
    }
    a60_mean_gap_ = g60;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = ok && g60 / g30 <= 0.5 && secs < 60.0;
    r.measured = "mean gap N=30 " + num(g30) + ", N=60 " + num(g60) + ", ratio " + num(g60 / g30) +
                 " (<= 0.5), runtime " + num(secs, 3) + " s (< 60)";
  }

  // 8. Problem scaled by 100 with the same config.
  void criterion_8(CriterionResult& r) {
    scaled_ = std::make_shared<const CompositeProblem>(stoch()->scaled(100.0));
    double g = 0.0, lhat = 0.0, lhat_ref = 0.0;
    bool ok = true;
    for (int s = 0; s < kSeeds; ++s) {
      const std::uint64_t seed = kSeedBase + static_cast<std::uint64_t>(s);
      const RunResult& rr =
          track("c8-a-scaled", scaled_, stoch_config(Variant::A_FixedHorizon, 60), StopRule::after(60), seed, false);
      ok = ok && rr.ok() && rr.x_final.allFinite();
      g += final_gap(rr) / kSeeds;
      if (!rr.records.empty()) lhat += rr.records.back().l_hat / kSeeds;
      lhat_ref += a60_.at(seed).records.back().l_hat / kSeeds;
    }
    const double gap_ratio = (g / 100.0) / a60_mean_gap_;
    const double lhat_ratio = lhat / lhat_ref;
    r.pass = ok && gap_ratio >= 1.0 / 3.0 && gap_ratio <= 3.0 && lhat_ratio >= 90.0 && lhat_ratio <= 110.0;
    r.measured = "completed " + std::string(ok ? "yes" : "no") + ", (gap/scale) ratio " + num(gap_ratio) +
                 " (in [1/3, 3]), L-hat ratio " + num(lhat_ratio) + " (in [90, 110])";
  }

  // 9. Variant B without a horizon, stopped at k = 60, within a factor 5 of Variant A.
  void criterion_9(CriterionResult& r) {
    double g = 0.0;
    bool ok = true;
    for (int s = 0; s < kSeeds; ++s) {
      const std::uint64_t seed = kSeedBase + static_cast<std::uint64_t>(s);
      const RunResult& rr =
          track("c9-b", stoch(), stoch_config(Variant::B_HorizonFree, std::nullopt), StopRule::after(60), seed, false);
      ok = ok && rr.ok();
      g += final_gap(rr) / kSeeds;
    }
    const double ratio = g / a60_mean_gap_;
    r.pass = ok && ratio <= 5.0 && ratio >= 0.2;
    r.measured = "mean gap B " + num(g) + " vs A " + num(a60_mean_gap_) + ", ratio " + num(ratio) + " (in [1/5, 5])";
  }

  // 10. Variant C coverage of the event that every estimate dominates its exact value.
  void criterion_10(CriterionResult& r) {
    int covered = 0;
    const int runs = 50;
    RunOptions o = quiet();
    o.track_exact = true;
    for (int s = 0; s < runs; ++s) {
      ScheduleConfig cfg = stoch_config(Variant::C_VarianceAdaptive, 30);
      cfg.inflation = 1.5;
      cfg.failure_prob = 0.05;
      const RunResult& rr =
          track("c10-c", stoch(), cfg, StopRule::after(30), 500 + static_cast<std::uint64_t>(s), false, o);
      bool ok = rr.ok() && rr.exact_sigma0_sq && rr.sigma0_sq >= *rr.exact_sigma0_sq;
      for (const auto& rec : rr.records)
        ok = ok && rec.sigma_next_sq >= *rec.exact_sigma_next_sq && rec.delta_sq >= *rec.exact_delta_sq &&
             rec.v_k >= *rec.exact_v_k;
      covered += ok;
    }
    const double cov = static_cast<double>(covered) / runs;
    const std::uint64_t pairs = pair_count(stoch_config(Variant::C_VarianceAdaptive, 30), 1);
    r.pass = cov >= 0.90;
    r.measured = "coverage " + num(cov) + " over " + std::to_string(runs) + " runs with r = " +
                 std::to_string(pairs) + " pairs (>= 0.90)";
  }

  void run_high_probability_set() {
    for (int s = 0; s < 5; ++s) {
      ScheduleConfig cfg = stoch_config(Variant::HP_HighProbability, std::nullopt);
      cfg.lambda = 1.0;
      track("hp", stoch(), cfg, StopRule::after(60), kSeedBase + static_cast<std::uint64_t>(s), false);
    }
  }

  // 12. Variant A no worse than PlainSGD at equal budget; deterministic baseline passes criterion 1's ratio.
  void criterion_12(CriterionResult& r) {
    double ga = 0.0, gs = 0.0;
    bool ok = true;
    for (const auto& [seed, ra] : a60_) {
      BaselineParams bp;
      bp.record_every = 100000;
      const std::uint64_t budget = ra.filtration.total_calls();
      const RunResult rs = run_baseline(*stoch(), BaselineKind::PlainSGD, bp,
                                        StopRule::budget(budget, std::numeric_limits<std::uint64_t>::max() / 2), seed,
                                        quiet());
      ok = ok && rs.ok() && rs.filtration.total_calls() == budget;
      ga += final_gap(ra) / static_cast<double>(a60_.size());
      gs += final_gap(rs) / static_cast<double>(a60_.size());
    }
    double ratio;
    std::optional<double> slope;
    bool det_ok;
    deterministic_ratio(true, ratio, slope, det_ok);
    r.pass = ok && ga <= gs && det_ok && ratio <= 0.35;
    r.measured = "equal-budget mean gap A " + num(ga) + " vs SGD " + num(gs) + "; deterministic baseline ratio " +
                 num(ratio) + " (<= 0.35)";
  }

  // 2. eta_k >= factor k / (32 L-hat_{k-1}) on every tracked trajectory.
  void criterion_2(CriterionResult& r) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> by_variant;  // violations, checks
    for (const auto& t : runs_) {
      auto& [bad, checks] = by_variant[variant_name(t.cfg.variant)];
      bad += count_lower_bound_violations(t.result.records, t.cfg);
      checks += t.result.records.empty() ? 0 : t.result.records.size() - 1;
    }
    std::size_t total = 0;
    std::string detail;
    for (const auto& [v, bc] : by_variant) {
      total += bc.first;
      detail += std::string(detail.empty() ? "" : ", ") + v + ": " + std::to_string(bc.first) + "/" +
                std::to_string(bc.second);
    }
    r.pass = total == 0;
    r.measured = "violations per variant " + detail + " (0 allowed)";
  }

  void criterion_3(CriterionResult& r) {
    std::size_t bad = 0, checks = 0;
    for (const auto& t : runs_) {
      bad += count_upper_cap_violations(t.result.records, t.cfg);
      checks += t.result.records.size();
    }
    r.pass = bad == 0;
    r.measured = std::to_string(bad) + " violations over " + std::to_string(checks) + " iterations (0 allowed)";
  }

  void criterion_11(CriterionResult& r) {
    std::size_t bad_calls = 0, bad_rn = 0;
    double worst = 0.0;
    for (const auto& t : runs_) {
      std::uint64_t m = 0, n = 0, rr = 0;
      for (const auto& rec : t.result.records) {
        m += rec.m;
        n += rec.n;
        rr += rec.r;
      }
      if (t.result.filtration.total_calls() != t.result.calls_init + m + 2 * n + 6 * rr) ++bad_calls;
      if (!t.result.records.empty() && t.result.records.back().calls_total != t.result.filtration.total_calls())
        ++bad_calls;
      const Summary s = report_summary(t.result, t.cfg, t.seed);
      const double direct = recompute_r_n_sq(t.result.records, t.cfg);
      const double rel = direct == 0.0 ? std::abs(s.r_n_sq) : std::abs(s.r_n_sq - direct) / std::abs(direct);
      worst = std::max(worst, rel);
      if (rel > 1e-12) ++bad_rn;
    }
    r.pass = bad_calls == 0 && bad_rn == 0;
    r.measured = std::to_string(runs_.size()) + " runs, counter mismatches " + std::to_string(bad_calls) +
                 ", worst R_N^2 rel diff " + num(worst, 3) + " (<= 1e-12)";
  }

  void criterion_13(CriterionResult& r) {
    std::set<std::string> seen;
    std::size_t checked = 0, mismatched = 0;
    for (const auto& t : runs_) {
      if (!seen.insert(t.label).second) continue;
      RunOptions o = quiet();
      o.track_exact = t.label == "c10-c";
      RunResult again;
      if (t.label.rfind("c12-deterministic", 0) == 0) {
        BaselineParams bp;
        bp.schedule = t.cfg;
        again = run_baseline(*t.problem, BaselineKind::DeterministicACFGM, bp, t.stop, t.seed, o);
      } else {
        again = run(*t.problem, t.cfg, t.stop, t.seed, o);
      }
      std::ostringstream a, b, fa, fb;
      write_records_csv(a, t.result.records);
      write_records_csv(b, again.records);
      t.result.filtration.write_csv(fa);
      again.filtration.write_csv(fb);
      ++checked;
      if (a.str() != b.str() || fa.str() != fb.str()) ++mismatched;
    }
    r.pass = mismatched == 0 && checked > 0;
    r.measured = std::to_string(checked) + " replayed runs, " + std::to_string(mismatched) +
                 " with differing CSV bytes (0 allowed)";
  }
};

inline std::string format_line(const CriterionResult& r, bool expected_failure = false) {
  std::ostringstream ss;
  ss << "criterion " << std::setw(2) << r.id << " " << (r.pass ? "PASS" : "FAIL");
  if (expected_failure) ss << (r.pass ? " (expected to fail, passed)" : " (expected, see README)");
  ss << "  " << r.name << ": " << r.measured;
  return ss.str();
}

}  // namespace sacfgm::acceptance
