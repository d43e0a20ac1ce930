#pragma once

// Post-run quantities: rate fit, R_N^2, D_0^2 and the run summary.

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sacfgm/optimizer.hpp"

namespace sacfgm {

struct RateFit {
  std::optional<double> slope;
  std::size_t points = 0;
  std::string diagnostic;
};

/// Least-squares slope of log(gap) against log(k) over the trailing
/// `window` fraction of (k, gap) pairs.
inline RateFit rate_fit(std::span<const double> ks, std::span<const double> gaps, double window = 0.5) {
  require(ks.size() == gaps.size(), "rate_fit: k and gap series differ in length");
  require(window > 0.0 && window <= 1.0, "rate_fit: window must lie in (0, 1]");
  RateFit out;
  const std::size_t n = gaps.size();
  const std::size_t start = n - static_cast<std::size_t>(std::floor(window * static_cast<double>(n)));
  out.points = n - start;
  if (out.points < 10) {
    out.diagnostic = "fit skipped: " + std::to_string(out.points) + " points in window, need at least 10";
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (!(gaps[i] > 0.0) || !std::isfinite(gaps[i])) {
      out.diagnostic = "fit skipped: nonpositive gap at k = " + std::to_string(ks[i]);
      return out;
    }
    const double x = std::log(ks[i]);
    const double y = std::log(gaps[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double np = static_cast<double>(out.points);
  out.slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
  return out;
}

/// Same fit with k = 1, 2, ... for the entries of `gaps`.
inline RateFit rate_fit(std::span<const double> gaps, double window = 0.5) {
  std::vector<double> ks(gaps.size());
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = static_cast<double>(i + 1);
  return rate_fit(ks, gaps, window);
}

inline RateFit rate_fit(const std::vector<TrajectoryRecord>& records, double window = 0.5) {
  std::vector<double> ks, gaps;
  for (const auto& r : records) {
    ks.push_back(static_cast<double>(r.k));
    gaps.push_back(r.gap ? *r.gap : std::numeric_limits<double>::quiet_NaN());
  }
  return rate_fit(ks, gaps, window);
}

/// (1/N) sum_k (v^max_{k-1} D-tilde^2 + delta_k^2 + sigma_{k-1}^2) / L-bar_{k-1}^2,
/// with L-bar_0 the L-hat seed; terms with L-bar_{k-1} = 0 are skipped.
inline double r_n_squared(const std::vector<TrajectoryRecord>& records, const ScheduleConfig& cfg) {
  if (records.empty()) return 0.0;
  const double d2 = cfg.d_tilde * cfg.d_tilde;
  double acc = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double lb = i == 0 ? l_hat_seed(cfg) : records[i - 1].l_bar;
    if (lb == 0.0) continue;
    const auto& r = records[i];
    acc += (r.v * d2 + r.delta_sq + r.sigma_sq) / (lb * lb);
  }
  return acc / static_cast<double>(records.size());
}

/// Initial-gap measure D_0^2 built from the minimum-norm subgradient of h at x_0.
inline double initial_distance_sq(const CompositeProblem& p, const ScheduleConfig& cfg) {
  if (!p.optimum) throw UnsupportedOperation("initial_distance_sq requires a known optimum");
  const DecisionVector g = p.f.full_grad(p.x0) + min_norm_subgradient(p.h, p.x0);
  const double dist = (p.optimum->x - p.x0).squaredNorm() + cfg.d_tilde * cfg.d_tilde;
  const double e2 = cfg.eta1 * cfg.eta1 * g.squaredNorm();
  if (cfg.variant == Variant::A_FixedHorizon) return 36.0 * e2 + 18.0 * dist;
  return 4.5 * e2 + 30.0 * dist;
}

struct Summary {
  std::string variant;
  std::uint64_t seed = 0;
  std::string status;
  std::string message;
  std::uint64_t iterations = 0;
  std::optional<double> final_gap;
  std::uint64_t calls_total = 0;
  std::uint64_t calls_init = 0;
  std::map<std::string, std::uint64_t> calls_by_stream;
  std::uint64_t sum_m = 0, sum_n = 0, sum_r = 0;
  bool accounting_ok = true;
  double r_n_sq = 0.0;
  double l_hat = 0.0;
  double v_max = 0.0;
  std::optional<double> d0_sq;
  std::optional<double> rate_exponent;
  std::string rate_diagnostic;
  std::size_t lower_bound_violations = 0;
  std::size_t upper_cap_violations = 0;
  bool audit_ok = true;
  std::vector<std::string> audit_violations;
  std::vector<std::string> warnings;
};

inline Summary report_summary(const RunResult& res, const ScheduleConfig& cfg, std::uint64_t seed,
                              const CompositeProblem* problem = nullptr) {
  Summary s;
  s.variant = variant_name(cfg.variant);
  s.seed = seed;
  s.status = status_name(res.status);
  s.message = res.message;
  s.iterations = res.records.empty() ? 0 : res.records.back().k;
  if (!res.records.empty()) {
    const auto& last = res.records.back();
    s.final_gap = last.gap;
    s.l_hat = last.l_hat;
    s.v_max = last.v_max;
  }
  s.calls_total = res.filtration.total_calls();
  s.calls_init = res.calls_init;
  for (auto k : kAllStreams) s.calls_by_stream[stream_name(k)] = res.filtration.calls(k);
  for (const auto& r : res.records) {
    s.sum_m += r.m;
    s.sum_n += r.n;
    s.sum_r += r.r;
    if (!r.lower_bound_ok) ++s.lower_bound_violations;
    if (!r.upper_caps_ok) ++s.upper_cap_violations;
  }
  s.accounting_ok = s.calls_total == s.calls_init + s.sum_m + 2 * s.sum_n + 6 * s.sum_r;
  s.r_n_sq = r_n_squared(res.records, cfg);
  if (problem && problem->optimum) s.d0_sq = initial_distance_sq(*problem, cfg);
  const RateFit fit = rate_fit(res.records, 0.5);
  s.rate_exponent = fit.slope;
  s.rate_diagnostic = fit.diagnostic;
  const AuditResult audit = audit_filtration(res.filtration);
  s.audit_ok = audit.ok;
  s.audit_violations = audit.violations;
  s.warnings = res.warnings;
  return s;
}

inline nlohmann::json summary_to_json(const Summary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["variant"] = s.variant;
  j["seed"] = s.seed;
  j["status"] = s.status;
  j["message"] = s.message;
  j["iterations"] = s.iterations;
  j["final_gap"] = opt(s.final_gap);
  j["calls_total"] = s.calls_total;
  j["calls_init"] = s.calls_init;
  j["calls_by_stream"] = s.calls_by_stream;
  j["sum_m"] = s.sum_m;
  j["sum_n"] = s.sum_n;
  j["sum_r"] = s.sum_r;
  j["accounting_ok"] = s.accounting_ok;
  j["r_n_sq"] = s.r_n_sq;
  j["l_hat"] = s.l_hat;
  j["v_max"] = s.v_max;
  j["d0_sq"] = opt(s.d0_sq);
  j["rate_exponent"] = opt(s.rate_exponent);
  j["rate_diagnostic"] = s.rate_diagnostic;
  j["lower_bound_violations"] = s.lower_bound_violations;
  j["upper_cap_violations"] = s.upper_cap_violations;
  j["audit_ok"] = s.audit_ok;
  j["audit_violations"] = s.audit_violations;
  j["warnings"] = s.warnings;
  return j;
}

}  // namespace sacfgm
