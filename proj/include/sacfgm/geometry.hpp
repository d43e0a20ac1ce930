#pragma once

// Feasible sets, prox-friendly terms and the closed-form proximal maps used by
// the anchored prox step.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>

#include "sacfgm/errors.hpp"

namespace sacfgm {

using DecisionVector = Eigen::VectorXd;

struct FullSpace {};

struct Box {
  DecisionVector lower;
  DecisionVector upper;
};

struct Ball {
  DecisionVector center;
  double radius = 1.0;
};

using FeasibleSet = std::variant<FullSpace, Box, Ball>;

struct ZeroTerm {};

struct L1Term {
  double weight = 0.0;
};

struct SetIndicatorTerm {
  FeasibleSet set;
};

using ProxTerm = std::variant<ZeroTerm, L1Term, SetIndicatorTerm>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline bool all_finite(const DecisionVector& v) { return v.allFinite(); }

inline std::string set_kind_name(const FeasibleSet& s) {
  return std::visit(overloaded{[](const FullSpace&) { return std::string("full"); },
                               [](const Box&) { return std::string("box"); },
                               [](const Ball&) { return std::string("ball"); }},
                    s);
}

inline std::string prox_kind_name(const ProxTerm& h) {
  return std::visit(overloaded{[](const ZeroTerm&) { return std::string("zero"); },
                               [](const L1Term&) { return std::string("l1"); },
                               [](const SetIndicatorTerm&) { return std::string("set"); }},
                    h);
}

inline void validate_set(const FeasibleSet& s, Eigen::Index dim) {
  std::visit(overloaded{[](const FullSpace&) {},
                        [dim](const Box& b) {
                          require(b.lower.size() == dim && b.upper.size() == dim,
                                  "box bounds must match the problem dimension");
                          for (Eigen::Index i = 0; i < dim; ++i) {
                            require(!std::isnan(b.lower[i]) && !std::isnan(b.upper[i]),
                                    "box bounds must not be NaN");
                            require(b.lower[i] <= b.upper[i], "box requires lower <= upper");
                          }
                        },
                        [dim](const Ball& b) {
                          require(b.center.size() == dim, "ball center must match the problem dimension");
                          require(b.center.allFinite(), "ball center must be finite");
                          require(std::isfinite(b.radius) && b.radius > 0.0, "ball radius must be > 0");
                        }},
             s);
}

inline DecisionVector project(const FeasibleSet& s, const DecisionVector& c) {
  return std::visit(overloaded{[&](const FullSpace&) -> DecisionVector { return c; },
                               [&](const Box& b) -> DecisionVector {
                                 return c.cwiseMax(b.lower).cwiseMin(b.upper);
                               },
                               [&](const Ball& b) -> DecisionVector {
                                 const DecisionVector d = c - b.center;
                                 const double n = d.norm();
                                 if (n <= b.radius) return c;
                                 return b.center + d * (b.radius / n);
                               }},
                    s);
}

inline double distance_to(const FeasibleSet& s, const DecisionVector& x) {
  return (x - project(s, x)).norm();
}

// Intersection of two sets when it is again one of the supported kinds.
inline std::optional<FeasibleSet> intersect(const FeasibleSet& a, const FeasibleSet& b) {
  if (std::holds_alternative<FullSpace>(a)) return b;
  if (std::holds_alternative<FullSpace>(b)) return a;
  if (std::holds_alternative<Box>(a) && std::holds_alternative<Box>(b)) {
    const auto& x = std::get<Box>(a);
    const auto& y = std::get<Box>(b);
    Box out{x.lower.cwiseMax(y.lower), x.upper.cwiseMin(y.upper)};
    if ((out.lower.array() > out.upper.array()).any()) return std::nullopt;
    return out;
  }
  return std::nullopt;
}

inline DecisionVector soft_threshold(const DecisionVector& c, double t) {
  return c.unaryExpr([t](double v) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
  });
}

inline double h_value(const ProxTerm& h, const DecisionVector& x, double tol = 1e-9) {
  return std::visit(
      overloaded{[](const ZeroTerm&) { return 0.0; },
                 [&](const L1Term& l) { return l.weight * x.lpNorm<1>(); },
                 [&](const SetIndicatorTerm& s) {
                   return distance_to(s.set, x) <= tol * (1.0 + x.norm())
                              ? 0.0
                              : std::numeric_limits<double>::infinity();
                 }},
      h);
}

// Minimum-norm element of the subdifferential of h at x.
inline DecisionVector min_norm_subgradient(const ProxTerm& h, const DecisionVector& x) {
  return std::visit(overloaded{[&](const ZeroTerm&) -> DecisionVector {
                                 return DecisionVector::Zero(x.size());
                               },
                               [&](const L1Term& l) -> DecisionVector {
                                 return x.unaryExpr([w = l.weight](double v) {
                                   return v > 0.0 ? w : (v < 0.0 ? -w : 0.0);
                                 });
                               },
                               [&](const SetIndicatorTerm&) -> DecisionVector {
                                 return DecisionVector::Zero(x.size());
                               }},
                    h);
}

// The set actually enforced by a prox step: X intersected with the indicator's set.
inline FeasibleSet effective_set(const ProxTerm& h, const FeasibleSet& x_set) {
  if (const auto* s = std::get_if<SetIndicatorTerm>(&h)) {
    auto both = intersect(x_set, s->set);
    if (!both)
      throw ContractViolation("set indicator combined with feasible set '" + set_kind_name(x_set) +
                              "' has no closed-form projection (supported: one of them full, or box with box)");
    return *both;
  }
  return x_set;
}

namespace detail {

// argmin_z t*w*||z||_1 + 0.5||z - c||^2  s.t. ||z - o|| <= R.
// KKT gives z(mu) = soft(c + t*mu*o, t*w) / (1 + t*mu); ||z(mu) - o|| is
// nonincreasing in mu, so bisect mu until the ball constraint is active.
inline DecisionVector l1_ball_prox(const DecisionVector& c, double t, double w, const Ball& ball) {
  auto at = [&](double mu) -> DecisionVector {
    return soft_threshold(c + (t * mu) * ball.center, t * w) / (1.0 + t * mu);
  };
  DecisionVector z = at(0.0);
  if ((z - ball.center).norm() <= ball.radius) return z;
  double lo = 0.0;
  double hi = 1.0 / t;
  while ((at(hi) - ball.center).norm() > ball.radius) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) break;
  }
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((at(mid) - ball.center).norm() > ball.radius)
      lo = mid;
    else
      hi = mid;
  }
  z = at(hi);
  // hi is on the feasible side up to rounding; snap onto the sphere.
  const DecisionVector d = z - ball.center;
  const double n = d.norm();
  if (n > ball.radius) z = ball.center + d * (ball.radius / n);
  return z;
}

}  // namespace detail

/// argmin_{z in X} t*h(z) + 0.5*||z - c||^2 for t > 0.
inline DecisionVector prox(const ProxTerm& h, const FeasibleSet& x_set, const DecisionVector& c, double t) {
  require(t > 0.0 && std::isfinite(t), "prox requires a positive finite stepsize");
  require(c.allFinite(), "prox requires a finite center");
  return std::visit(
      overloaded{[&](const ZeroTerm&) -> DecisionVector { return project(x_set, c); },
                 [&](const SetIndicatorTerm&) -> DecisionVector {
                   return project(effective_set(h, x_set), c);
                 },
                 [&](const L1Term& l) -> DecisionVector {
                   return std::visit(
                       overloaded{[&](const FullSpace&) -> DecisionVector {
                                    return soft_threshold(c, t * l.weight);
                                  },
                                  // separable: shrink then clip is exact
                                  [&](const Box& b) -> DecisionVector {
                                    return soft_threshold(c, t * l.weight).cwiseMax(b.lower).cwiseMin(b.upper);
                                  },
                                  [&](const Ball& b) -> DecisionVector {
                                    return detail::l1_ball_prox(c, t, l.weight, b);
                                  }},
                       x_set);
                 }},
      h);
}

}  // namespace sacfgm
