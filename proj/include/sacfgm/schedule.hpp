#pragma once

// Stepsize recursions, batch-size rules and the constants of each regime.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "sacfgm/errors.hpp"

namespace sacfgm {

enum class Variant {
  A_FixedHorizon,
  B_HorizonFree,
  C_VarianceAdaptive,
  HP_HighProbability,
};

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::A_FixedHorizon: return "a";
    case Variant::B_HorizonFree: return "b";
    case Variant::C_VarianceAdaptive: return "c";
    case Variant::HP_HighProbability: return "hp";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "a" || s == "A") return Variant::A_FixedHorizon;
  if (s == "b" || s == "B") return Variant::B_HorizonFree;
  if (s == "c" || s == "C") return Variant::C_VarianceAdaptive;
  if (s == "hp" || s == "HP") return Variant::HP_HighProbability;
  throw ConfigError("variant: unknown value '" + s + "' (expected a, b, c or hp)");
}

inline bool uses_anchor(Variant v) { return v != Variant::A_FixedHorizon; }

struct BatchConstants {
  double c = 0.0;
  double c_tilde = 0.0;
};

inline BatchConstants default_constants(Variant v, double lambda = 1.0) {
  switch (v) {
    case Variant::A_FixedHorizon: return {73.0, 1728.0};
    case Variant::B_HorizonFree:
    case Variant::C_VarianceAdaptive: return {8.0, 745.0};
    case Variant::HP_HighProbability:
      return {9.0 * (1.0 + lambda) + 729.0 * lambda * lambda, 988.0 * (1.0 + lambda)};
  }
  return {};
}

struct ScheduleConfig {
  Variant variant = Variant::A_FixedHorizon;
  double beta = 0.125;
  double eta1 = 1.0;
  double d_tilde = 1.0;
  std::optional<std::uint64_t> horizon;  // N; required by Variant A
  double v0 = 1e-8;
  double lambda = 1.0;                    // HP confidence parameter
  std::optional<BatchConstants> constants;  // overrides the variant table
  double inflation = 1.5;                 // Variant C
  double failure_prob = 0.05;             // Variant C, p_N
  double hp_proxy_factor = 1.0;           // HP: sub-Gaussian proxy = factor * exact variance
  std::uint64_t batch_cap = 10'000'000;

  BatchConstants batch_constants() const { return constants ? *constants : default_constants(variant, lambda); }
};

/// Throws ConfigError naming the violated constraint.
inline void validate(const ScheduleConfig& cfg) {
  const bool a = cfg.variant == Variant::A_FixedHorizon;
  if (!(std::isfinite(cfg.beta) && cfg.beta > 0.0 && (a ? cfg.beta <= 0.125 : cfg.beta < 0.125)))
    throw ConfigError(std::string("schedule.beta: must satisfy ") + (a ? "beta in (0, 1/8]" : "beta in (0, 1/8)") +
                      ", got " + std::to_string(cfg.beta));
  if (!(std::isfinite(cfg.eta1) && cfg.eta1 > 0.0)) throw ConfigError("schedule.eta1: must be positive");
  if (!(std::isfinite(cfg.d_tilde) && cfg.d_tilde > 0.0)) throw ConfigError("schedule.d_tilde: must be positive");
  if (!(std::isfinite(cfg.v0) && cfg.v0 > 0.0)) throw ConfigError("schedule.v0: must be positive");
  if (a && (!cfg.horizon || *cfg.horizon == 0))
    throw ConfigError("schedule.n: Variant A requires a known horizon N >= 1");
  if (cfg.variant == Variant::HP_HighProbability && !(std::isfinite(cfg.lambda) && cfg.lambda > 0.0))
    throw ConfigError("schedule.lambda: must be positive");
  if (cfg.constants && !(cfg.constants->c > 0.0 && cfg.constants->c_tilde > 0.0))
    throw ConfigError("schedule.constants: c and c_tilde must be positive");
  if (cfg.variant == Variant::C_VarianceAdaptive) {
    if (!(std::isfinite(cfg.inflation) && cfg.inflation >= 1.0)) throw ConfigError("schedule.inflation: must be >= 1");
    if (!(cfg.failure_prob > 0.0 && cfg.failure_prob < 1.0))
      throw ConfigError("schedule.failure_prob: must lie in (0, 1)");
  }
  if (!(cfg.hp_proxy_factor > 0.0)) throw ConfigError("schedule.hp_proxy_factor: must be positive");
  if (cfg.batch_cap == 0) throw ConfigError("schedule.batch_cap: must be >= 1");
}

/// Live schedule quantities at iteration k (after x_k is formed, before
/// the stepsize for k+1 is chosen).
struct ScheduleState {
  std::uint64_t k = 1;
  double eta = 0.0;         // eta_k
  double l_bar_prev = 0.0;  // L-bar_{k-1}
  double v_max = 0.0;       // v^max_{k-1}
  double l_hat = 0.0;       // L-hat_{k-1}
};

inline double l_hat_seed(const ScheduleConfig& cfg) {
  const double denom = cfg.variant == Variant::A_FixedHorizon ? 32.0 : 64.0;
  return 1.0 / (denom * (1.0 - cfg.beta) * cfg.eta1);
}

inline ScheduleState initial_state(const ScheduleConfig& cfg) {
  ScheduleState s;
  s.k = 1;
  s.eta = cfg.eta1;
  s.l_bar_prev = 0.0;
  s.v_max = cfg.v0;
  s.l_hat = l_hat_seed(cfg);
  return s;
}

inline double gamma_k(const ScheduleConfig& cfg, std::uint64_t k) {
  return uses_anchor(cfg.variant) ? 1.0 / static_cast<double>(k) : 0.0;
}

inline double tau_k(const ScheduleConfig& cfg, std::uint64_t k) {
  const double kd = static_cast<double>(k);
  return uses_anchor(cfg.variant) ? 0.5 * (kd + 2.0 - cfg.beta) : 0.5 * kd;
}

inline double beta_k(const ScheduleConfig& cfg, std::uint64_t k) { return k <= 1 ? 0.0 : cfg.beta; }

/// eta_{k+1} from eta_k and L-bar_k. A zero L-bar drops the curvature term.
inline double next_stepsize(const ScheduleConfig& cfg, std::uint64_t k, double eta_k, double l_bar_k) {
  require(k >= 1, "next_stepsize requires k >= 1");
  require(eta_k > 0.0, "next_stepsize requires eta_k > 0");
  require(l_bar_k >= 0.0, "next_stepsize requires L-bar >= 0");
  const double b = cfg.beta;
  const double kd = static_cast<double>(k);
  double growth;
  if (k == 1) {
    growth = uses_anchor(cfg.variant) ? 2.0 * (1.0 - b) * eta_k / (3.0 - b)
                                      : std::min(2.0 * (1.0 - b) * eta_k, 2.0 * eta_k / b);
  } else {
    growth = uses_anchor(cfg.variant) ? kd * (kd + 3.0 - b) * eta_k / ((kd + 1.0) * (kd + 1.0))
                                      : (kd + 1.0) * eta_k / kd;
  }
  if (l_bar_k == 0.0) return growth;
  return std::min(kd / (16.0 * l_bar_k), growth);
}

inline double next_stepsize(const ScheduleConfig& cfg, const ScheduleState& s, double l_bar_k) {
  return next_stepsize(cfg, s.k, s.eta, l_bar_k);
}

namespace detail {

inline std::uint64_t ceil_batch(double raw, const ScheduleConfig& cfg, const char* what, std::uint64_t k) {
  if (!std::isfinite(raw) || raw > static_cast<double>(cfg.batch_cap))
    throw BudgetExceeded(std::string(what) + " at iteration " + std::to_string(k) + " would be " +
                         std::to_string(raw) + ", above the cap " + std::to_string(cfg.batch_cap));
  return static_cast<std::uint64_t>(std::ceil(std::max(1.0, raw)));
}

inline double horizon_factor(const ScheduleConfig& cfg, std::uint64_t k) {
  if (cfg.variant == Variant::A_FixedHorizon) return static_cast<double>(*cfg.horizon) + 2.0;
  return static_cast<double>(k) + 2.0;
}

}  // namespace detail

/// m_k from eta_k and the gradient variance at x_{k-1}.
inline std::uint64_t batch_size_main(const ScheduleConfig& cfg, double eta_k, double sigma_prev_sq, std::uint64_t k) {
  require(eta_k > 0.0 && sigma_prev_sq >= 0.0, "batch_size_main requires eta > 0 and sigma^2 >= 0");
  const double b = cfg.beta;
  const double raw = detail::horizon_factor(cfg, k) * eta_k * eta_k / (b * b) * cfg.batch_constants().c *
                     sigma_prev_sq / (cfg.d_tilde * cfg.d_tilde);
  return detail::ceil_batch(raw, cfg, "main batch m_k", k);
}

/// n_k from eta_k, v^max_{k-1}, the variance at x_{k-1} and the variance at x_k.
inline std::uint64_t batch_size_step(const ScheduleConfig& cfg, double eta_k, double v_max_prev, double sigma_prev_sq,
                                     double delta_k_sq, std::uint64_t k) {
  require(eta_k > 0.0 && v_max_prev >= 0.0 && sigma_prev_sq >= 0.0 && delta_k_sq >= 0.0,
          "batch_size_step requires nonnegative inputs");
  const BatchConstants cs = cfg.batch_constants();
  const double b = cfg.beta;
  const double h = detail::horizon_factor(cfg, k);
  const double p = cfg.variant == Variant::A_FixedHorizon ? 3.0 : 4.0;
  const double smooth_term = cs.c_tilde * h * eta_k * eta_k * v_max_prev / std::pow(b, p);
  const double var_term =
      h * eta_k * eta_k / (b * b) * cs.c * (sigma_prev_sq + delta_k_sq) / (cfg.d_tilde * cfg.d_tilde);
  return detail::ceil_batch(std::max(smooth_term, var_term), cfg, "step batch n_k", k);
}

/// Number of pairs r_k per variance batch (Variant C).
inline std::uint64_t pair_count(const ScheduleConfig& cfg, std::uint64_t k) {
  const double arg = cfg.horizon ? static_cast<double>(*cfg.horizon) / cfg.failure_prob
                                 : (static_cast<double>(k) + 1.0) * (static_cast<double>(k) + 1.0) / cfg.failure_prob;
  return static_cast<std::uint64_t>(std::max(1.0, std::ceil(8.0 * std::log(arg))));
}

/// eta_k >= factor * k / (32 L-hat_{k-1}), factor 1 for A and 15/16 otherwise.
inline bool stepsize_lower_bound_check(const ScheduleConfig& cfg, const ScheduleState& s) {
  if (s.k < 2) return true;
  const double factor = cfg.variant == Variant::A_FixedHorizon ? 1.0 : 15.0 / 16.0;
  const double bound = factor * static_cast<double>(s.k) / (32.0 * s.l_hat);
  return s.eta >= bound * (1.0 - 1e-12);
}

/// eta_{k+1} <= growth cap and eta_{k+1} * L-bar_k <= k/16, each with 1e-12 relative slack.
inline bool stepsize_upper_caps_hold(const ScheduleConfig& cfg, std::uint64_t k, double eta_k, double eta_next,
                                     double l_bar_k) {
  const double kd = static_cast<double>(k);
  const double tol = 1.0 + 1e-12;
  if (k >= 2) {
    const double cap = uses_anchor(cfg.variant) ? kd * (kd + 3.0 - cfg.beta) * eta_k / ((kd + 1.0) * (kd + 1.0))
                                                : (kd + 1.0) * eta_k / kd;
    if (eta_next > cap * tol) return false;
  }
  if (l_bar_k > 0.0 && eta_next * l_bar_k > kd / 16.0 * tol) return false;
  return true;
}

}  // namespace sacfgm
