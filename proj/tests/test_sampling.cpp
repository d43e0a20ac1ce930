#include <gtest/gtest.h>

#include <cstdlib>

#include "sacfgm/acceptance.hpp"
#include "sacfgm/sacfgm.hpp"

using namespace sacfgm;

TEST(DrawBatch, Deterministic) {
  const auto a = draw_batch(42, StreamKind::StepTaylor, 7, 500, 1000);
  const auto b = draw_batch(42, StreamKind::StepTaylor, 7, 500, 1000);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.kind, StreamKind::StepTaylor);
  EXPECT_EQ(a.iteration, 7u);
}

TEST(DrawBatch, SingleComponent) {
  const auto b = draw_batch(1, StreamKind::MainUpdate, 1, 100, 1);
  for (auto i : b.indices) EXPECT_EQ(i, 0u);
}

TEST(DrawBatch, RejectsEmpty) {
  EXPECT_THROW(draw_batch(1, StreamKind::MainUpdate, 1, 0, 5), ContractViolation);
  EXPECT_THROW(draw_batch(1, StreamKind::MainUpdate, 1, 5, 0), ContractViolation);
}

TEST(DrawBatch, PrefixStableAcrossSizes) {
  const auto small = draw_batch(9, StreamKind::VarMain, 3, 10, 77);
  const auto big = draw_batch(9, StreamKind::VarMain, 3, 1000, 77);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small.indices[i], big.indices[i]);
}

TEST(DrawBatch, StreamsDifferAndAreUniform) {
  const std::uint64_t m = 10, n = 10000;
  for (StreamKind kind : kAllStreams) {
    const auto b = draw_batch(5, kind, 3, n, m);
    std::vector<double> counts(m, 0.0);
    for (auto i : b.indices) counts[i] += 1.0;
    double chi2 = 0.0;
    const double expect = static_cast<double>(n) / static_cast<double>(m);
    for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
    EXPECT_LT(chi2, 27.877) << stream_name(kind);  // chi-square, 9 dof, p = 0.001
  }
  const auto a = draw_batch(5, StreamKind::StepGradDiff, 3, n, m);
  const auto b = draw_batch(5, StreamKind::StepTaylor, 3, n, m);
  std::size_t same = 0;
  for (std::size_t i = 0; i < n; ++i) same += a.indices[i] == b.indices[i];
  EXPECT_LT(same, n / 5);  // about n / m matches expected by chance
}

TEST(DrawBatch, MatchedPositionsUncorrelatedAcrossStreams) {
  const std::uint64_t m = 1000, n = 100000;
  for (std::size_t s = 0; s + 1 < kAllStreams.size(); ++s) {
    const auto a = draw_batch(11, kAllStreams[s], 4, n, m);
    const auto b = draw_batch(11, kAllStreams[s + 1], 4, n, m);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ma += a.indices[i];
      mb += b.indices[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double da = a.indices[i] - ma, db = b.indices[i] - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
    EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 0.01);
  }
}

namespace {

FiltrationLog well_formed(int iterations) {
  FiltrationLog log;
  for (int k = 1; k <= iterations; ++k) {
    log.append(k, StreamKind::MainUpdate, 3 + k);
    log.append(k, StreamKind::StepGradDiff, 2 * k);
    log.append(k, StreamKind::StepTaylor, 2 * k);
  }
  return log;
}

}  // namespace

TEST(AuditFiltration, WellFormedLogPasses) {
  const auto r = audit_filtration(well_formed(10));
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.violations.empty());
}

TEST(AuditFiltration, TaylorBeforeGradDiffFails) {
  FiltrationLog log = well_formed(3);
  log.append(4, StreamKind::MainUpdate, 2);
  log.append(4, StreamKind::StepTaylor, 5);
  log.append(4, StreamKind::StepGradDiff, 5);
  const auto r = audit_filtration(log);
  EXPECT_FALSE(r.ok);
  ASSERT_FALSE(r.violations.empty());
  EXPECT_NE(r.violations.front().find("iteration 4"), std::string::npos);
}

TEST(AuditFiltration, CounterMismatchFails) {
  FiltrationLog log = well_formed(5);
  log.force_total_for_testing(log.total_calls() + 1);
  EXPECT_FALSE(audit_filtration(log).ok);
}

TEST(AuditFiltration, UnequalStepBatchesFail) {
  FiltrationLog log;
  log.append(1, StreamKind::MainUpdate, 1);
  log.append(1, StreamKind::StepGradDiff, 4);
  log.append(1, StreamKind::StepTaylor, 5);
  EXPECT_FALSE(audit_filtration(log).ok);
}

TEST(AuditFiltration, RepeatedStreamFails) {
  FiltrationLog log;
  log.append(1, StreamKind::MainUpdate, 1);
  log.append(1, StreamKind::MainUpdate, 1);
  EXPECT_FALSE(audit_filtration(log).ok);
}

TEST(AuditFiltration, EveryVariantRunPasses) {
  const auto p = acceptance::stochastic_quadratic();
  for (Variant v : {Variant::A_FixedHorizon, Variant::B_HorizonFree, Variant::C_VarianceAdaptive,
                    Variant::HP_HighProbability}) {
    ScheduleConfig cfg;
    cfg.variant = v;
    cfg.beta = v == Variant::A_FixedHorizon ? 0.125 : 0.12;
    cfg.d_tilde = 1.0;
    if (v == Variant::A_FixedHorizon) cfg.horizon = 15;
    const auto r = run(p, cfg, StopRule::after(15), 3);
    ASSERT_TRUE(r.ok()) << r.message;
    const auto audit = audit_filtration(r.filtration);
    EXPECT_TRUE(audit.ok) << variant_name(v) << ": " << (audit.violations.empty() ? "" : audit.violations.front());
  }
}

TEST(Replay, IdenticalAcrossThreadCounts) {
  nlohmann::json j = {{"schedule", {{"variant", "c"}, {"beta", 0.12}, {"d_tilde", "initial_distance"}}},
                      {"stop", {{"iterations", 12}}},
                      {"seeds", {1, 2, 3, 4, 5}},
                      {"options", {{"record_timing", false}}}};
  const RunConfig rc = parse_run_config(j);
  const auto p = build_problem(rc.problem);
  setenv("STOCH_ACFGM_THREADS", "1", 1);
  const auto serial = execute_config(rc, p);
  setenv("STOCH_ACFGM_THREADS", "4", 1);
  const auto threaded = execute_config(rc, p);
  unsetenv("STOCH_ACFGM_THREADS");
  ASSERT_EQ(serial.size(), threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(records_csv_string(serial[i].result.records), records_csv_string(threaded[i].result.records));
    EXPECT_TRUE(serial[i].result.filtration == threaded[i].result.filtration);
  }
}

TEST(Threads, EnvironmentOverride) {
  setenv("STOCH_ACFGM_THREADS", "3", 1);
  EXPECT_EQ(thread_count(), 3u);
  setenv("STOCH_ACFGM_THREADS", "zero", 1);
  EXPECT_GE(thread_count(), 1u);
  unsetenv("STOCH_ACFGM_THREADS");
}
