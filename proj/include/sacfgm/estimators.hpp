#pragma once

// Batch quantities behind the adaptive stepsize and batch sizes.

#include <cmath>
#include <optional>
#include <span>

#include "sacfgm/problem.hpp"
#include "sacfgm/sampling.hpp"

namespace sacfgm {

struct BatchGradStats {
  DecisionVector mean_grad;
  double mean_value = 0.0;
  std::size_t batch_size = 0;
};

inline BatchGradStats batch_grad(const CompositeProblem& p, const DecisionVector& x, const BatchDraw& batch) {
  require(batch.size() > 0, "batch_grad requires a nonempty batch");
  BatchGradStats s;
  s.mean_value = p.f.mean_value_grad(x, batch.indices, s.mean_grad);
  s.batch_size = batch.size();
  return s;
}

/// Paired difference (1/n) sum [G(x_curr, xi_i) - G(x_prev, xi_i)] on one batch.
inline DecisionVector grad_diff(const CompositeProblem& p, const DecisionVector& x_prev, const DecisionVector& x_curr,
                                const BatchDraw& batch) {
  require(batch.kind == StreamKind::StepGradDiff, "grad_diff requires a StepGradDiff batch");
  return p.f.mean_grad_diff(x_prev, x_curr, batch.indices);
}

struct TaylorRemainder {
  double raw = 0.0;      // as computed, may be slightly negative
  double clamped = 0.0;  // max(raw, 0)
};

inline TaylorRemainder taylor_remainder_detail(const CompositeProblem& p, const DecisionVector& x_prev,
                                               const DecisionVector& x_curr, std::span<const ComponentIndex> idx) {
  TaylorRemainder t;
  t.raw = p.f.mean_bregman(x_prev, x_curr, idx);
  t.clamped = t.raw > 0.0 ? t.raw : 0.0;
  return t;
}

/// (1/n) sum [F(x_prev) - F(x_curr) - <G(x_curr), x_prev - x_curr>], clamped at 0.
inline double taylor_remainder(const CompositeProblem& p, const DecisionVector& x_prev, const DecisionVector& x_curr,
                               const BatchDraw& batch) {
  require(batch.kind == StreamKind::StepTaylor, "taylor_remainder requires a StepTaylor batch");
  return taylor_remainder_detail(p, x_prev, x_curr, batch.indices).clamped;
}

enum class SmoothnessStatus {
  Ok,            // ratio computed
  ZeroByConvention,  // 0/0
  Degenerate,    // T == 0 but gradient difference is not negligible
};

struct LocalSmoothness {
  double value = 0.0;
  SmoothnessStatus status = SmoothnessStatus::Ok;
};

/// ||delta_g||^2 / (2 T). `scale` sets the underflow floor for the 0/0 case.
inline LocalSmoothness local_smoothness_detail(const DecisionVector& delta_g, double T, double scale = 1.0) {
  require(T >= 0.0, "local_smoothness requires T >= 0");
  const double num = delta_g.squaredNorm();
  if (T > 0.0) return {num / (2.0 * T), SmoothnessStatus::Ok};
  if (num <= 1e-24 * scale * scale) return {0.0, SmoothnessStatus::ZeroByConvention};
  return {0.0, SmoothnessStatus::Degenerate};
}

inline double local_smoothness(const DecisionVector& delta_g, double T, double scale = 1.0) {
  return local_smoothness_detail(delta_g, T, scale).value;
}

struct VarianceEstimates {
  double sigma_hat_sq = 0.0;
  double v_hat_sq = 0.0;
  double delta_hat_sq = 0.0;
  std::size_t pair_count = 0;
  double inflation = 1.0;
};

namespace detail {

inline std::size_t pair_count_of(const BatchDraw& b) {
  require(b.size() >= 2 && b.size() % 2 == 0, "pairwise estimators need an even batch of at least 2");
  return b.size() / 2;
}

}  // namespace detail

/// inflation * (1/2r) sum_i ||G(x, xi_{2i-1}) - G(x, xi_{2i})||^2.
inline double pairwise_grad_variance(const CompositeProblem& p, const DecisionVector& x, const BatchDraw& batch,
                                     double inflation) {
  require(inflation >= 1.0, "inflation must be >= 1");
  const std::size_t r = detail::pair_count_of(batch);
  DecisionVector ga, gb;
  double acc = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    p.f.value_grad(x, batch.indices[2 * i], ga);
    p.f.value_grad(x, batch.indices[2 * i + 1], gb);
    acc += (ga - gb).squaredNorm();
  }
  return inflation * acc / (2.0 * static_cast<double>(r));
}

/// inflation * (1/2r) sum_i (l(xi_{2i-1}) - l(xi_{2i}))^2 with per-sample
/// smoothness l at the pair (x_prev, x_curr).
inline double pairwise_smoothness_variance(const CompositeProblem& p, const DecisionVector& x_prev,
                                           const DecisionVector& x_curr, const BatchDraw& batch, double inflation) {
  require(inflation >= 1.0, "inflation must be >= 1");
  const std::size_t r = detail::pair_count_of(batch);
  const double dist_sq = (x_curr - x_prev).squaredNorm();
  if (dist_sq == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    const double la = 2.0 * p.f.bregman(batch.indices[2 * i], x_prev, x_curr) / dist_sq;
    const double lb = 2.0 * p.f.bregman(batch.indices[2 * i + 1], x_prev, x_curr) / dist_sq;
    acc += (la - lb) * (la - lb);
  }
  return inflation * acc / (2.0 * static_cast<double>(r));
}

/// All three pairwise estimates: sigma-hat at x from the VarTaylor batch,
/// delta-hat at x from the VarMain batch, v-hat on (x_prev, x) from the
/// VarGradDiff batch (requires x_prev).
inline VarianceEstimates pairwise_variances(const CompositeProblem& p, const DecisionVector& x,
                                            const std::optional<DecisionVector>& x_prev, const BatchDraw& var_main,
                                            const BatchDraw& var_grad_diff, const BatchDraw& var_taylor,
                                            double inflation) {
  require(var_main.kind == StreamKind::VarMain && var_grad_diff.kind == StreamKind::VarGradDiff &&
              var_taylor.kind == StreamKind::VarTaylor,
          "pairwise_variances requires the three variance batches");
  require(x_prev.has_value(), "v-hat requires the previous iterate");
  VarianceEstimates e;
  e.inflation = inflation;
  e.pair_count = detail::pair_count_of(var_taylor);
  e.sigma_hat_sq = pairwise_grad_variance(p, x, var_taylor, inflation);
  e.delta_hat_sq = pairwise_grad_variance(p, x, var_main, inflation);
  e.v_hat_sq = pairwise_smoothness_variance(p, *x_prev, x, var_grad_diff, inflation);
  return e;
}

}  // namespace sacfgm
