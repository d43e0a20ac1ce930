#include <gtest/gtest.h>

#include <cmath>

#include "sacfgm/acceptance.hpp"
#include "sacfgm/sacfgm.hpp"

using namespace sacfgm;

namespace {

ScheduleConfig variant_a(std::uint64_t n, double eta1 = 1.0) {
  ScheduleConfig c;
  c.variant = Variant::A_FixedHorizon;
  c.beta = 0.125;
  c.eta1 = eta1;
  c.horizon = n;
  return c;
}

ScheduleConfig anchored(Variant v) {
  ScheduleConfig c;
  c.variant = v;
  c.beta = 0.12;
  return c;
}

CompositeProblem single_component_quadratic() {
  QuadraticSpec s;
  s.dim = 6;
  s.components = 1;
  s.condition = 10.0;
  s.noise = 0.0;
  s.seed = 21;
  return make_quadratic(s);
}

CompositeProblem finite_sum_quadratic(Eigen::Index m) {
  QuadraticSpec s;
  s.dim = 10;
  s.components = m;
  s.condition = 100.0;
  s.max_curvature = 0.1;
  s.noise = 0.1;
  s.seed = 12;
  return make_quadratic(s);
}

RunOptions quiet(bool track = false) {
  RunOptions o;
  o.record_timing = false;
  o.track_exact = track;
  return o;
}

double rel_diff(const DecisionVector& a, const DecisionVector& b) {
  return (a - b).norm() / std::max(1.0, std::max(a.norm(), b.norm()));
}

}  // namespace

TEST(Run, ZeroNoiseSingleComponentUsesUnitBatches) {
  const auto p = single_component_quadratic();
  const auto cfg = variant_a(5);
  const auto first = run(p, cfg, StopRule::after(5), 1, quiet());
  ASSERT_TRUE(first.ok()) << first.message;
  ASSERT_EQ(first.records.size(), 5u);
  for (const auto& r : first.records) {
    EXPECT_EQ(r.m, 1u);
    EXPECT_EQ(r.n, 1u);
  }
  for (std::uint64_t seed : {2, 99, 123456789}) {
    const auto other = run(p, cfg, StopRule::after(5), seed, quiet());
    EXPECT_EQ(records_csv_string(first.records), records_csv_string(other.records));
    EXPECT_EQ(first.x_final, other.x_final);
  }
}

TEST(Run, FirstIterationUnrolled) {
  const auto p = single_component_quadratic();
  const auto cfg = variant_a(1, 0.3);
  const auto res = run(p, cfg, StopRule::after(1), 4, quiet(true));
  ASSERT_TRUE(res.ok());
  const DecisionVector g = p.f.grad(p.x0, 0);
  const DecisionVector z1 = p.x0 - 0.3 * g;
  const DecisionVector x1 = (z1 + 0.5 * p.x0) / 1.5;
  EXPECT_LT(rel_diff(res.z_path.at(0), z1), 1e-14);
  EXPECT_LT(rel_diff(res.x_path.at(0), x1), 1e-14);
  EXPECT_EQ(res.y_path.at(0), p.x0);
}

TEST(Run, ConvexCombinationIdentities) {
  const auto p = finite_sum_quadratic(50);
  for (ScheduleConfig cfg : {variant_a(25), anchored(Variant::B_HorizonFree), anchored(Variant::C_VarianceAdaptive)}) {
    const auto res = run(p, cfg, StopRule::after(25), 8, quiet(true));
    ASSERT_TRUE(res.ok()) << res.message;
    DecisionVector x_prev = p.x0, y_prev = p.x0;
    for (std::size_t i = 0; i < res.records.size(); ++i) {
      const std::uint64_t k = i + 1;
      const double tau = cfg.variant == Variant::A_FixedHorizon ? k / 2.0 : (k + 2.0 - cfg.beta) / 2.0;
      const double b = k == 1 ? 0.0 : cfg.beta;
      EXPECT_LT(rel_diff(res.x_path[i], (res.z_path[i] + tau * x_prev) / (1.0 + tau)), 1e-12);
      EXPECT_LT(rel_diff(res.y_path[i], (1.0 - b) * y_prev + b * res.z_path[i]), 1e-12);
      x_prev = res.x_path[i];
      y_prev = res.y_path[i];
    }
  }
}

TEST(Run, IteratesStayFeasible) {
  auto box_problem = finite_sum_quadratic(30);
  box_problem.optimum.reset();
  const DecisionVector c = box_problem.x0;
  box_problem.set = Box{c.array() - 0.05, c.array() + 0.05};
  auto ball_problem = box_problem;
  ball_problem.set = Ball{c, 0.05};
  auto indicator_problem = box_problem;
  indicator_problem.set = FullSpace{};
  indicator_problem.h = SetIndicatorTerm{Ball{c, 0.05}};
  for (const auto& p : {box_problem, ball_problem, indicator_problem}) {
    for (Variant v : {Variant::A_FixedHorizon, Variant::B_HorizonFree}) {
      const auto cfg = v == Variant::A_FixedHorizon ? variant_a(20) : anchored(v);
      const auto res = run(p, cfg, StopRule::after(20), 3, quiet(true));
      ASSERT_TRUE(res.ok()) << res.message;
      const FeasibleSet s = p.feasible_set();
      for (std::size_t i = 0; i < res.records.size(); ++i) {
        EXPECT_LE(distance_to(s, res.x_path[i]), 1e-12);
        EXPECT_LE(distance_to(s, res.y_path[i]), 1e-12);
        EXPECT_LE(distance_to(s, res.z_path[i]), 1e-12);
      }
    }
  }
}

TEST(Run, OracleCallIdentityPerVariant) {
  const auto p = finite_sum_quadratic(50);
  ScheduleConfig hp = anchored(Variant::HP_HighProbability);
  for (ScheduleConfig cfg : {variant_a(15), anchored(Variant::B_HorizonFree), anchored(Variant::C_VarianceAdaptive), hp}) {
    const auto res = run(p, cfg, StopRule::after(15), 5, quiet());
    ASSERT_TRUE(res.ok()) << res.message;
    std::uint64_t expected = res.calls_init;
    for (const auto& r : res.records) expected += r.m + 2 * r.n + 6 * r.r;
    EXPECT_EQ(res.filtration.total_calls(), expected) << variant_name(cfg.variant);
    EXPECT_EQ(res.records.back().calls_total, expected);
    const Summary s = report_summary(res, cfg, 5, &p);
    EXPECT_TRUE(s.accounting_ok);
    EXPECT_TRUE(s.audit_ok);
    EXPECT_EQ(s.upper_cap_violations, 0u);
    if (cfg.variant == Variant::C_VarianceAdaptive) {
      EXPECT_GT(res.calls_init, 0u);
      EXPECT_GT(s.sum_r, 0u);
    } else {
      EXPECT_EQ(s.sum_r, 0u);
    }
  }
}

TEST(Run, StepsizeInvariantsHoldForVariantA) {
  const auto p = finite_sum_quadratic(50);
  const auto cfg = variant_a(40);
  const auto res = run(p, cfg, StopRule::after(40), 6, quiet());
  ASSERT_TRUE(res.ok());
  EXPECT_EQ(acceptance::count_lower_bound_violations(res.records, cfg), 0u);
  EXPECT_EQ(acceptance::count_upper_cap_violations(res.records, cfg), 0u);
}

TEST(Run, ScalingCovarianceOnNoiseFreeProblem) {
  const auto p = single_component_quadratic();
  for (double s : {8.0, 3.0}) {
    const auto q = p.scaled(s);
    const auto base = run(p, variant_a(30), StopRule::after(30), 1, quiet(true));
    const auto scaled = run(q, variant_a(30, 1.0 / s), StopRule::after(30), 1, quiet(true));
    ASSERT_TRUE(base.ok() && scaled.ok());
    for (std::size_t i = 0; i < base.records.size(); ++i) {
      EXPECT_LT(rel_diff(base.x_path[i], scaled.x_path[i]), 1e-10) << "s " << s << " k " << i + 1;
      EXPECT_NEAR(scaled.records[i].l_bar / base.records[i].l_bar, s, 1e-9 * s);
      EXPECT_NEAR(scaled.records[i].eta * s, base.records[i].eta, 1e-10 * base.records[i].eta);
    }
  }
}

TEST(Run, ReplayFromProblemDocumentIsBitwiseIdentical) {
  const auto p = finite_sum_quadratic(40);
  const auto reloaded = problem_from_json(nlohmann::json::parse(problem_to_json(p).dump()));
  for (ScheduleConfig cfg : {variant_a(12), anchored(Variant::C_VarianceAdaptive)}) {
    const auto a = run(p, cfg, StopRule::after(12), 77, quiet());
    const auto b = run(reloaded, cfg, StopRule::after(12), 77, quiet());
    EXPECT_EQ(records_csv_string(a.records), records_csv_string(b.records));
    EXPECT_TRUE(a.filtration == b.filtration);
    EXPECT_EQ(a.x_final, b.x_final);
  }
}

TEST(Run, MoreIterationsLowerMeanGap) {
  const auto p = finite_sum_quadratic(50);
  auto cfg = variant_a(40);
  cfg.d_tilde = (p.x0 - p.optimum->x).norm();
  double at20 = 0.0, at40 = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto res = run(p, cfg, StopRule::after(40), seed, quiet());
    ASSERT_TRUE(res.ok()) << res.message;
    at20 += *res.records.at(19).gap;
    at40 += *res.records.at(39).gap;
  }
  EXPECT_LT(at40, at20);
}

TEST(Run, TargetGapStop) {
  const auto p = single_component_quadratic();
  const double eps = 1e-3 * evaluate_gap(p, p.x0);
  const auto res = run(p, variant_a(500), StopRule::target(eps, 500), 1, quiet());
  EXPECT_EQ(res.status, RunStatus::TargetReached);
  ASSERT_GE(res.records.size(), 2u);
  EXPECT_LE(*res.records.back().gap, eps);
  EXPECT_GT(*res.records[res.records.size() - 2].gap, eps);
}

TEST(Run, TargetGapNeedsOptimum) {
  auto p = single_component_quadratic();
  p.optimum.reset();
  EXPECT_THROW(run(p, variant_a(5), StopRule::target(1e-3, 5), 1), ContractViolation);
}

TEST(Run, BudgetCapEndsRunWithPartialRecords) {
  const auto p = finite_sum_quadratic(50);
  auto cfg = variant_a(30);
  const auto full = run(p, cfg, StopRule::after(30), 2, quiet());
  ASSERT_TRUE(full.ok());
  cfg.batch_cap = full.records.at(9).n;
  const auto capped = run(p, cfg, StopRule::after(30), 2, quiet());
  EXPECT_EQ(capped.status, RunStatus::BudgetExceeded);
  EXPECT_FALSE(capped.message.empty());
  EXPECT_GE(capped.records.size(), 9u);
  EXPECT_LT(capped.records.size(), 30u);
  EXPECT_EQ(records_csv_string(capped.records),
            records_csv_string({full.records.begin(), full.records.begin() + capped.records.size()}));
}

TEST(Run, CallBudgetStop) {
  const auto p = finite_sum_quadratic(50);
  const auto res = run(p, anchored(Variant::B_HorizonFree), StopRule::budget(5000, 1000), 2, quiet());
  ASSERT_TRUE(res.ok());
  EXPECT_GE(res.records.back().calls_total, 5000u);
  EXPECT_LT(res.records[res.records.size() - 2].calls_total, 5000u);
}

TEST(Run, RejectsInvalidSchedule) {
  auto cfg = variant_a(5);
  cfg.beta = 0.5;
  EXPECT_THROW(run(single_component_quadratic(), cfg, StopRule::after(5), 1), ConfigError);
}

TEST(Baselines, DeterministicACFGMAcceleratedRatio) {
  const auto p = acceptance::deterministic_quadratic();
  BaselineParams bp;
  bp.schedule = variant_a(400);
  const auto res = run_baseline(p, BaselineKind::DeterministicACFGM, bp, StopRule::after(400), 1, quiet());
  ASSERT_TRUE(res.ok());
  EXPECT_LE(*res.records.at(399).gap / *res.records.at(199).gap, 0.35);
  EXPECT_EQ(res.filtration.total_calls(), 400u * 3u);  // M = 1: m + 2n per iteration
}

TEST(Baselines, PlainSGDIsSlower) {
  const auto p = acceptance::deterministic_quadratic();
  const auto res = run_baseline(p, BaselineKind::PlainSGD, {}, StopRule::after(400), 1, quiet());
  ASSERT_TRUE(res.ok());
  EXPECT_GE(*res.records.at(399).gap / *res.records.at(199).gap, 0.4);
}

TEST(Baselines, KnownLWithoutNoiseDecaysAccelerated) {
  const auto p = acceptance::deterministic_quadratic();
  BaselineParams bp;
  bp.known_l = p.f.max_smoothness();
  const auto res = run_baseline(p, BaselineKind::KnownL_AcceleratedMinibatch, bp, StopRule::after(400), 1, quiet());
  ASSERT_TRUE(res.ok());
  for (const auto& r : res.records) EXPECT_EQ(r.m, 1u);
  EXPECT_LE(*res.records.at(399).gap / *res.records.at(199).gap, 0.35);
}

TEST(Baselines, KnownLRequiresConstant) {
  EXPECT_THROW(run_baseline(single_component_quadratic(), BaselineKind::KnownL_AcceleratedMinibatch, {},
                            StopRule::after(5), 1),
               ContractViolation);
}

TEST(Baselines, RecordStrideKeepsLast) {
  BaselineParams bp;
  bp.record_every = 7;
  const auto res = run_baseline(single_component_quadratic(), BaselineKind::PlainSGD, bp, StopRule::after(30), 1);
  ASSERT_EQ(res.records.size(), 5u);  // 7, 14, 21, 28, 30
  EXPECT_EQ(res.records.back().k, 30u);
}

TEST(Baselines, ParseNames) {
  EXPECT_EQ(parse_baseline("plain_sgd"), BaselineKind::PlainSGD);
  EXPECT_EQ(parse_baseline(baseline_name(BaselineKind::KnownL_AcceleratedMinibatch)),
            BaselineKind::KnownL_AcceleratedMinibatch);
  EXPECT_THROW(parse_baseline("adam"), ConfigError);
}

TEST(Summary, ZeroNoiseRunLeavesOnlyFloorTerm) {
  const auto p = single_component_quadratic();
  const auto cfg = variant_a(20);
  const auto res = run(p, cfg, StopRule::after(20), 1, quiet());
  ASSERT_TRUE(res.ok());
  double floor_only = 0.0;
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    EXPECT_EQ(res.records[i].sigma_sq, 0.0);
    EXPECT_EQ(res.records[i].delta_sq, 0.0);
    const double lb = i == 0 ? 32.0 * (1.0 - cfg.beta) * cfg.eta1 : 1.0 / res.records[i - 1].l_bar;
    floor_only += cfg.v0 * lb * lb;
  }
  floor_only /= static_cast<double>(res.records.size());
  const Summary s = report_summary(res, cfg, 1, &p);
  EXPECT_NEAR(s.r_n_sq, floor_only, 1e-12 * floor_only);
  EXPECT_LT(s.r_n_sq, 1e-4);
}

TEST(Summary, ConstantRecordsGiveUnitRatio) {
  auto cfg = variant_a(10, 1.0 / 28.0);  // seed 1 / (32 * 7/8 * eta1) = 1
  cfg.d_tilde = 1.0;
  std::vector<TrajectoryRecord> recs(10);
  for (auto& r : recs) {
    r.v = 1.0;
    r.l_bar = 1.0;
  }
  EXPECT_NEAR(r_n_squared(recs, cfg), 1.0, 1e-12);
}

TEST(Summary, InitialDistanceAndCallsByStream) {
  const auto p = finite_sum_quadratic(50);
  const auto cfg = anchored(Variant::C_VarianceAdaptive);
  const auto res = run(p, cfg, StopRule::after(10), 3, quiet());
  const Summary s = report_summary(res, cfg, 3, &p);
  ASSERT_TRUE(s.d0_sq.has_value());
  const double g2 = p.f.full_grad(p.x0).squaredNorm();
  const double dist = (p.optimum->x - p.x0).squaredNorm() + 1.0;
  EXPECT_NEAR(*s.d0_sq, 4.5 * g2 + 30.0 * dist, 1e-12 * *s.d0_sq);
  std::uint64_t total = 0;
  for (const auto& [name, calls] : s.calls_by_stream) total += calls;
  EXPECT_EQ(total, s.calls_total);
  EXPECT_EQ(s.iterations, 10u);
  EXPECT_EQ(s.status, "completed");
  const auto j = summary_to_json(s);
  EXPECT_EQ(j.at("variant"), "c");
}
