#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sacfgm/errors.hpp"
#include "sacfgm/geometry.hpp"

namespace sacfgm {

using ComponentIndex = std::uint32_t;

/// f_i(x) = 0.5 * (a_i^T x - b_i)^2, rows a_i stored as matrix rows.
struct LeastSquaresTerms {
  Eigen::MatrixXd rows;
  Eigen::VectorXd targets;
};

/// f_i(x) = 0.5 * s_i * (x - b_i)^T H (x - b_i) with one shared SPD H.
struct QuadraticTerms {
  Eigen::MatrixXd hessian;
  Eigen::MatrixXd centers;  // M x dim
  Eigen::VectorXd scales;
};

/// f_i(x) = log(1 + exp(-y_i * a_i^T x)), y_i in {-1, +1}.
struct LogisticTerms {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;
};

using ComponentTerms = std::variant<LeastSquaresTerms, QuadraticTerms, LogisticTerms>;

namespace detail {

// log(1 + exp(u)) without overflow.
inline double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

inline double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace detail

/// Uniform finite sum f(x) = weight * (1/M) * sum_i f_i(x) of convex smooth
/// components. Immutable after construction.
class SmoothFiniteSum {
 public:
  SmoothFiniteSum() = default;

  explicit SmoothFiniteSum(ComponentTerms terms, double weight = 1.0)
      : terms_(std::move(terms)), weight_(weight) {
    require(std::isfinite(weight_) && weight_ > 0.0, "objective weight must be positive");
    std::visit(overloaded{[&](const LeastSquaresTerms& t) {
                            require(t.rows.rows() == t.targets.size(), "least squares: rows/targets mismatch");
                            require(t.rows.rows() > 0 && t.rows.cols() > 0, "least squares: empty data");
                            count_ = t.rows.rows();
                            dim_ = t.rows.cols();
                            smoothness_.resize(count_);
                            for (Eigen::Index i = 0; i < count_; ++i)
                              smoothness_[i] = weight_ * t.rows.row(i).squaredNorm();
                          },
                          [&](QuadraticTerms& t) {
                            require(t.hessian.rows() == t.hessian.cols() && t.hessian.rows() > 0,
                                    "quadratic: hessian must be square");
                            require(t.centers.cols() == t.hessian.rows(), "quadratic: centers/hessian mismatch");
                            require(t.centers.rows() == t.scales.size() && t.scales.size() > 0,
                                    "quadratic: centers/scales mismatch");
                            require((t.scales.array() >= 0.0).all(), "quadratic: scales must be nonnegative");
                            require(t.hessian.isApprox(t.hessian.transpose(), 1e-12),
                                    "quadratic: hessian must be symmetric");
                            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t.hessian, Eigen::EigenvaluesOnly);
                            require(eig.eigenvalues().minCoeff() >= -1e-12 * std::abs(eig.eigenvalues().maxCoeff()),
                                    "quadratic: hessian must be positive semidefinite");
                            count_ = t.centers.rows();
                            dim_ = t.centers.cols();
                            hessian_norm_ = eig.eigenvalues().maxCoeff();
                            hessian_centers_ = t.centers * t.hessian;  // row i = (H b_i)^T
                            smoothness_.resize(count_);
                            for (Eigen::Index i = 0; i < count_; ++i)
                              smoothness_[i] = weight_ * t.scales[i] * hessian_norm_;
                          },
                          [&](const LogisticTerms& t) {
                            require(t.features.rows() == t.labels.size(), "logistic: features/labels mismatch");
                            require(t.features.rows() > 0 && t.features.cols() > 0, "logistic: empty data");
                            require((t.labels.array().abs() == 1.0).all(), "logistic: labels must be +-1");
                            count_ = t.features.rows();
                            dim_ = t.features.cols();
                            smoothness_.resize(count_);
                            for (Eigen::Index i = 0; i < count_; ++i)
                              smoothness_[i] = 0.25 * weight_ * t.features.row(i).squaredNorm();
                          }},
               terms_);
    require(count_ <= static_cast<Eigen::Index>(UINT32_MAX), "too many components");
  }

  Eigen::Index size() const { return count_; }
  Eigen::Index dim() const { return dim_; }
  double weight() const { return weight_; }
  const ComponentTerms& terms() const { return terms_; }
  std::string kind() const {
    return std::visit(overloaded{[](const LeastSquaresTerms&) { return std::string("least_squares"); },
                                 [](const QuadraticTerms&) { return std::string("quadratic"); },
                                 [](const LogisticTerms&) { return std::string("logistic"); }},
                      terms_);
  }

  /// Exact Lipschitz constant of grad f_i (weight included).
  double component_smoothness(ComponentIndex i) const { return smoothness_.at(i); }
  double max_smoothness() const { return *std::max_element(smoothness_.begin(), smoothness_.end()); }

  SmoothFiniteSum scaled(double s) const { return SmoothFiniteSum(terms_, weight_ * s); }

  void check_index(ComponentIndex i) const {
    if (static_cast<Eigen::Index>(i) >= count_)
      throw ContractViolation("component index " + std::to_string(i) + " out of range [0, " +
                              std::to_string(count_) + ")");
  }

  /// F(x, i) and G(x, i); writes the gradient into grad.
  double value_grad(const DecisionVector& x, ComponentIndex i, DecisionVector& grad) const {
    check_index(i);
    return std::visit(overloaded{[&](const LeastSquaresTerms& t) {
                                   const double r = t.rows.row(i).dot(x) - t.targets[i];
                                   grad = (weight_ * r) * t.rows.row(i).transpose();
                                   return 0.5 * weight_ * r * r;
                                 },
                                 [&](const QuadraticTerms& t) {
                                   const DecisionVector d = x - t.centers.row(i).transpose();
                                   const DecisionVector hd = t.hessian * d;
                                   grad = (weight_ * t.scales[i]) * hd;
                                   return 0.5 * weight_ * t.scales[i] * d.dot(hd);
                                 },
                                 [&](const LogisticTerms& t) {
                                   const double margin = t.labels[i] * t.features.row(i).dot(x);
                                   grad = (-weight_ * t.labels[i] * detail::sigmoid(-margin)) *
                                          t.features.row(i).transpose();
                                   return weight_ * detail::softplus(-margin);
                                 }},
                      terms_);
  }

  double value(const DecisionVector& x, ComponentIndex i) const {
    DecisionVector g;
    return value_grad(x, i, g);
  }

  DecisionVector grad(const DecisionVector& x, ComponentIndex i) const {
    DecisionVector g;
    value_grad(x, i, g);
    return g;
  }

  /// F(xp, i) - F(xc, i) - <G(xc, i), xp - xc>, analytic where available.
  double bregman(ComponentIndex i, const DecisionVector& xp, const DecisionVector& xc) const {
    check_index(i);
    return std::visit(overloaded{[&](const LeastSquaresTerms& t) {
                                   const double a = t.rows.row(i).dot(xp - xc);
                                   return 0.5 * weight_ * a * a;
                                 },
                                 [&](const QuadraticTerms& t) {
                                   const DecisionVector d = xp - xc;
                                   return 0.5 * weight_ * t.scales[i] * d.dot(t.hessian * d);
                                 },
                                 [&](const LogisticTerms&) {
                                   DecisionVector gc;
                                   const double fc = value_grad(xc, i, gc);
                                   return value(xp, i) - fc - gc.dot(xp - xc);
                                 }},
                      terms_);
  }

  /// Mean gradient and value over an index list, summed in list order.
  double mean_value_grad(const DecisionVector& x, std::span<const ComponentIndex> idx, DecisionVector& grad) const {
    require(!idx.empty(), "batch must be nonempty");
    grad = DecisionVector::Zero(dim_);
    double value = 0.0;
    std::visit(overloaded{[&](const LeastSquaresTerms& t) {
                            for (ComponentIndex i : idx) {
                              check_index(i);
                              const double r = t.rows.row(i).dot(x) - t.targets[i];
                              grad.noalias() += r * t.rows.row(i).transpose();
                              value += 0.5 * r * r;
                            }
                          },
                          [&](const QuadraticTerms& t) {
                            const DecisionVector hx = t.hessian * x;
                            DecisionVector hd(dim_);
                            for (ComponentIndex i : idx) {
                              check_index(i);
                              const double s = t.scales[i];
                              hd = hx - hessian_centers_.row(i).transpose();
                              grad.noalias() += s * hd;
                              value += 0.5 * s * (x - t.centers.row(i).transpose()).dot(hd);
                            }
                          },
                          [&](const LogisticTerms& t) {
                            for (ComponentIndex i : idx) {
                              check_index(i);
                              const double margin = t.labels[i] * t.features.row(i).dot(x);
                              grad.noalias() += (-t.labels[i] * detail::sigmoid(-margin)) * t.features.row(i).transpose();
                              value += detail::softplus(-margin);
                            }
                          }},
               terms_);
    const double scale = weight_ / static_cast<double>(idx.size());
    grad *= scale;
    return value * scale;
  }

  /// (1/|B|) sum_{i in B} [G(xc, i) - G(xp, i)] on the same samples.
  DecisionVector mean_grad_diff(const DecisionVector& xp, const DecisionVector& xc,
                                std::span<const ComponentIndex> idx) const {
    require(!idx.empty(), "batch must be nonempty");
    DecisionVector out = DecisionVector::Zero(dim_);
    const DecisionVector d = xc - xp;
    std::visit(overloaded{[&](const LeastSquaresTerms& t) {
                            for (ComponentIndex i : idx) {
                              check_index(i);
                              out.noalias() += t.rows.row(i).dot(d) * t.rows.row(i).transpose();
                            }
                          },
                          [&](const QuadraticTerms& t) {
                            double s = 0.0;
                            for (ComponentIndex i : idx) {
                              check_index(i);
                              s += t.scales[i];
                            }
                            out = s * (t.hessian * d);
                          },
                          [&](const LogisticTerms& t) {
                            for (ComponentIndex i : idx) {
                              check_index(i);
                              const double mc = t.labels[i] * t.features.row(i).dot(xc);
                              const double mp = t.labels[i] * t.features.row(i).dot(xp);
                              const double coef = -t.labels[i] * (detail::sigmoid(-mc) - detail::sigmoid(-mp));
                              out.noalias() += coef * t.features.row(i).transpose();
                            }
                          }},
               terms_);
    return out * (weight_ / static_cast<double>(idx.size()));
  }

  /// Mean Bregman remainder over an index list (may be slightly negative from rounding).
  double mean_bregman(const DecisionVector& xp, const DecisionVector& xc, std::span<const ComponentIndex> idx) const {
    require(!idx.empty(), "batch must be nonempty");
    double sum = 0.0;
    if (const auto* q = std::get_if<QuadraticTerms>(&terms_)) {
      const DecisionVector d = xp - xc;
      const double dhd = d.dot(q->hessian * d);
      double s = 0.0;
      for (ComponentIndex i : idx) {
        check_index(i);
        s += q->scales[i];
      }
      return 0.5 * weight_ * dhd * s / static_cast<double>(idx.size());
    }
    for (ComponentIndex i : idx) sum += bregman(i, xp, xc);
    return sum / static_cast<double>(idx.size());
  }

  double full_value(const DecisionVector& x) const {
    DecisionVector g;
    return full_value_grad(x, g);
  }

  DecisionVector full_grad(const DecisionVector& x) const {
    DecisionVector g;
    full_value_grad(x, g);
    return g;
  }

  double full_value_grad(const DecisionVector& x, DecisionVector& grad) const {
    return mean_value_grad(x, all_indices(), grad);
  }

  std::span<const ComponentIndex> all_indices() const {
    if (static_cast<Eigen::Index>(all_.size()) != count_) {
      all_.resize(static_cast<std::size_t>(count_));
      for (std::size_t i = 0; i < all_.size(); ++i) all_[i] = static_cast<ComponentIndex>(i);
    }
    return all_;
  }

 private:
  ComponentTerms terms_;
  double weight_ = 1.0;
  Eigen::Index count_ = 0;
  Eigen::Index dim_ = 0;
  double hessian_norm_ = 0.0;
  Eigen::MatrixXd hessian_centers_;
  std::vector<double> smoothness_;
  mutable std::vector<ComponentIndex> all_;
};

struct KnownOptimum {
  DecisionVector x;
  double psi_star = 0.0;
};

/// Psi = f + h over X, plus the starting point and (for synthetic
/// instances) the optimum used by verification.
struct CompositeProblem {
  std::string name;
  SmoothFiniteSum f;
  ProxTerm h = ZeroTerm{};
  FeasibleSet set = FullSpace{};
  DecisionVector x0;
  std::optional<KnownOptimum> optimum;

  Eigen::Index dim() const { return f.dim(); }

  void validate() const {
    require(f.size() > 0, "problem has no components");
    require(x0.size() == f.dim(), "x0 dimension mismatch");
    require(x0.allFinite(), "x0 must be finite");
    validate_set(set, f.dim());
    std::visit(overloaded{[](const ZeroTerm&) {},
                          [](const L1Term& l) {
                            require(std::isfinite(l.weight) && l.weight >= 0.0, "l1 weight must be >= 0");
                          },
                          [&](const SetIndicatorTerm& s) { validate_set(s.set, f.dim()); }},
               h);
    const FeasibleSet eff = effective_set(h, set);
    require(distance_to(eff, x0) <= 1e-12 * (1.0 + x0.norm()), "x0 must lie in the feasible set");
    if (optimum) {
      require(optimum->x.size() == f.dim(), "optimum dimension mismatch");
      require(std::isfinite(optimum->psi_star), "optimum value must be finite");
    }
  }

  double psi(const DecisionVector& x) const { return f.full_value(x) + h_value(h, x); }

  FeasibleSet feasible_set() const { return effective_set(h, set); }

  /// Scale Psi by s > 0 (smooth part, l1 weight and the recorded optimum value).
  CompositeProblem scaled(double s) const {
    require(std::isfinite(s) && s > 0.0, "scale must be positive");
    CompositeProblem out = *this;
    out.f = f.scaled(s);
    if (auto* l = std::get_if<L1Term>(&out.h)) l->weight *= s;
    if (out.optimum) out.optimum->psi_star *= s;
    return out;
  }
};

/// Exact (F(x, i), G(x, i)) of component i.
inline std::pair<double, DecisionVector> sample_value_grad(const CompositeProblem& p, const DecisionVector& x,
                                                           ComponentIndex index) {
  require(x.allFinite(), "sample_value_grad requires a finite point");
  DecisionVector g;
  const double v = p.f.value_grad(x, index, g);
  return {v, std::move(g)};
}

/// argmin_{z in X} <g, z> + h(z) + 1/(2 eta) ||y - z||^2 + gamma/(2 eta) ||y0 - z||^2.
/// The two quadratics merge into (1+gamma)/(2 eta) ||z - c||^2.
inline DecisionVector prox_step(const CompositeProblem& p, const DecisionVector& g, const DecisionVector& y,
                                const DecisionVector& y0, double eta, double gamma) {
  require(std::isfinite(eta) && eta > 0.0, "prox_step requires eta > 0");
  require(std::isfinite(gamma) && gamma >= 0.0, "prox_step requires gamma >= 0");
  require(g.allFinite() && y.allFinite() && y0.allFinite(), "prox_step requires finite inputs");
  const DecisionVector c = (y + gamma * y0 - eta * g) / (1.0 + gamma);
  return prox(p.h, p.set, c, eta / (1.0 + gamma));
}

struct GradientMapping {
  DecisionVector point;
  DecisionVector reduced_grad;
};

/// P(u, y, c) = argmin_{x in X} <y, x> + h(x) + 1/(2c)||x - u||^2 and (u - P)/c.
inline GradientMapping gradient_mapping(const CompositeProblem& p, const DecisionVector& u, const DecisionVector& y,
                                        double c) {
  require(std::isfinite(c) && c > 0.0, "gradient_mapping requires c > 0");
  require(u.allFinite() && y.allFinite(), "gradient_mapping requires finite inputs");
  GradientMapping out;
  out.point = prox(p.h, p.set, u - c * y, c);
  out.reduced_grad = (u - out.point) / c;
  return out;
}

namespace detail {

// Population variance of rows computed relative to the first row, so that
// identical rows give exactly zero.
inline double shifted_variance(const Eigen::MatrixXd& rows) {
  const Eigen::Index m = rows.rows();
  if (m <= 1) return 0.0;
  const Eigen::RowVectorXd ref = rows.row(0);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(rows.cols());
  for (Eigen::Index i = 0; i < m; ++i) mean += rows.row(i) - ref;
  mean /= static_cast<double>(m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) acc += (rows.row(i) - ref - mean).squaredNorm();
  return acc / static_cast<double>(m);
}

}  // namespace detail

/// (1/M) sum_i ||G(x, i) - grad f(x)||^2 under uniform single draws.
inline double exact_point_variance(const CompositeProblem& p, const DecisionVector& x) {
  require(x.allFinite(), "exact_point_variance requires a finite point");
  const Eigen::Index m = p.f.size();
  Eigen::MatrixXd grads(m, p.dim());
  DecisionVector g;
  for (Eigen::Index i = 0; i < m; ++i) {
    p.f.value_grad(x, static_cast<ComponentIndex>(i), g);
    grads.row(i) = g.transpose();
  }
  return detail::shifted_variance(grads);
}

/// Per-component local smoothness l(i) = 2 * Bregman_i(x_prev, x_curr) / ||x_curr - x_prev||^2.
inline Eigen::VectorXd sample_smoothness(const CompositeProblem& p, const DecisionVector& x_prev,
                                         const DecisionVector& x_curr) {
  const double dist_sq = (x_curr - x_prev).squaredNorm();
  Eigen::VectorXd ell = Eigen::VectorXd::Zero(p.f.size());
  if (dist_sq == 0.0) return ell;  // 0/0 = 0
  for (Eigen::Index i = 0; i < ell.size(); ++i)
    ell[i] = 2.0 * p.f.bregman(static_cast<ComponentIndex>(i), x_prev, x_curr) / dist_sq;
  return ell;
}

/// (1/M) sum_i |l(i) - L|^2 with L the component mean of l.
inline double exact_smoothness_variance(const CompositeProblem& p, const DecisionVector& x_prev,
                                        const DecisionVector& x_curr) {
  require(x_prev.allFinite() && x_curr.allFinite(), "exact_smoothness_variance requires finite points");
  const Eigen::VectorXd ell = sample_smoothness(p, x_prev, x_curr);
  return detail::shifted_variance(ell);
}

}  // namespace sacfgm
