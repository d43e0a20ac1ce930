#pragma once

// Seeded synthetic problem families with a recorded optimum.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "sacfgm/problem.hpp"

namespace sacfgm {

/// Shared-Hessian finite-sum quadratic. Eigenvalues of H are log-spaced in
/// [max_curvature/condition, max_curvature]; centers scatter around x* with
/// standard deviation `noise`; `curvature_spread` draws component scales
/// uniformly in [1 - spread, 1 + spread].
struct QuadraticSpec {
  Eigen::Index dim = 10;
  Eigen::Index components = 200;
  double condition = 100.0;
  double max_curvature = 1.0;
  double noise = 0.1;
  double curvature_spread = 0.0;
  double x0_distance = 1.0;
  std::uint64_t seed = 1;
};

/// Rows a_i with heterogeneous norms: ||a_i|| scaled by exp(heterogeneity * N(0,1)).
struct LeastSquaresSpec {
  Eigen::Index dim = 5;
  Eigen::Index components = 50;
  double heterogeneity = 0.5;
  double noise = 0.1;
  double x0_distance = 1.0;
  std::uint64_t seed = 1;
};

struct LassoSpec {
  LeastSquaresSpec base;
  double l1_weight = 0.05;
};

struct LogisticSpec {
  Eigen::Index dim = 5;
  Eigen::Index components = 100;
  double radius = 2.0;
  double label_noise = 0.1;
  std::uint64_t seed = 1;
};

namespace detail {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n01(rng);
  return m;
}

inline Eigen::VectorXd random_unit(Eigen::Index dim, std::mt19937_64& rng) {
  Eigen::VectorXd v = gaussian_matrix(dim, 1, rng).col(0);
  return v / v.norm();
}

}  // namespace detail

/// Deterministic accelerated proximal gradient with the global smoothness
/// constant and function-value restart; returns the best point found.
/// Used to certify optima of instances without a closed form.
inline DecisionVector reference_minimizer(const CompositeProblem& p, double tol = 1e-12, int max_iter = 200000) {
  const double lip = p.f.max_smoothness();
  const double step = 1.0 / lip;
  DecisionVector x = p.x0;
  DecisionVector x_prev = x;
  DecisionVector yk = x;
  double t = 1.0;
  double best = p.psi(x);
  DecisionVector best_x = x;
  const double scale = 1.0 + p.f.full_grad(p.x0).norm();
  DecisionVector g;
  for (int it = 0; it < max_iter; ++it) {
    p.f.full_value_grad(yk, g);
    DecisionVector next = prox(p.h, p.set, yk - step * g, step);
    const double val = p.psi(next);
    if (val > best) {  // restart momentum
      t = 1.0;
      yk = best_x;
      x_prev = best_x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    yk = next + ((t - 1.0) / t_next) * (next - x);
    x_prev = x;
    x = next;
    t = t_next;
    best = val;
    best_x = x;
    const DecisionVector gm = (x - prox(p.h, p.set, x - step * p.f.full_grad(x), step)) / step;
    if (gm.norm() <= tol * scale) break;
  }
  return best_x;
}

inline CompositeProblem make_quadratic(const QuadraticSpec& s) {
  require(s.dim > 0 && s.components > 0, "quadratic generator: dim and components must be positive");
  require(s.condition >= 1.0 && s.max_curvature > 0.0, "quadratic generator: need condition >= 1, curvature > 0");
  require(s.noise >= 0.0 && s.curvature_spread >= 0.0 && s.curvature_spread < 1.0,
          "quadratic generator: need noise >= 0 and spread in [0, 1)");
  std::mt19937_64 rng(s.seed);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(detail::gaussian_matrix(s.dim, s.dim, rng));
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd eig(s.dim);
  for (Eigen::Index i = 0; i < s.dim; ++i) {
    const double frac = s.dim == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(s.dim - 1);
    eig[i] = s.max_curvature * std::pow(s.condition, frac - 1.0);
  }
  Eigen::MatrixXd h = q * eig.asDiagonal() * q.transpose();
  h = 0.5 * (h + h.transpose()).eval();

  const Eigen::VectorXd x_star = detail::gaussian_matrix(s.dim, 1, rng).col(0);
  Eigen::MatrixXd centers = detail::gaussian_matrix(s.components, s.dim, rng) * s.noise;
  Eigen::VectorXd scales = Eigen::VectorXd::Ones(s.components);
  if (s.curvature_spread > 0.0) {
    std::uniform_real_distribution<double> u(1.0 - s.curvature_spread, 1.0 + s.curvature_spread);
    for (Eigen::Index i = 0; i < s.components; ++i) scales[i] = u(rng);
  }
  // Recenter so that the scale-weighted mean of the centers is exactly 0, then shift by x*.
  const Eigen::RowVectorXd wmean = (scales.transpose() * centers) / scales.sum();
  centers.rowwise() -= wmean;
  centers.rowwise() += x_star.transpose();

  CompositeProblem p;
  p.name = "quadratic";
  p.f = SmoothFiniteSum(QuadraticTerms{h, centers, scales});
  p.x0 = x_star + s.x0_distance * detail::random_unit(s.dim, rng);
  // grad f(x) = H (sum s_i (x - b_i)) / M vanishes at the weighted center mean.
  const DecisionVector opt = (centers.transpose() * scales) / scales.sum();
  p.optimum = KnownOptimum{opt, p.f.full_value(opt)};
  p.validate();
  return p;
}

namespace detail {

inline LeastSquaresTerms least_squares_terms(const LeastSquaresSpec& s, std::mt19937_64& rng, DecisionVector& x_true) {
  require(s.dim > 0 && s.components >= s.dim, "least squares generator: need components >= dim > 0");
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd rows = gaussian_matrix(s.components, s.dim, rng) / std::sqrt(static_cast<double>(s.dim));
  for (Eigen::Index i = 0; i < s.components; ++i) rows.row(i) *= std::exp(s.heterogeneity * n01(rng));
  x_true = gaussian_matrix(s.dim, 1, rng).col(0);
  Eigen::VectorXd targets = rows * x_true;
  for (Eigen::Index i = 0; i < s.components; ++i) targets[i] += s.noise * n01(rng);
  return LeastSquaresTerms{rows, targets};
}

}  // namespace detail

inline CompositeProblem make_least_squares(const LeastSquaresSpec& s) {
  std::mt19937_64 rng(s.seed);
  DecisionVector x_true;
  LeastSquaresTerms terms = detail::least_squares_terms(s, rng, x_true);
  const DecisionVector opt = terms.rows.colPivHouseholderQr().solve(terms.targets);
  CompositeProblem p;
  p.name = "least_squares";
  p.f = SmoothFiniteSum(std::move(terms));
  p.x0 = opt + s.x0_distance * detail::random_unit(s.dim, rng);
  p.optimum = KnownOptimum{opt, p.f.full_value(opt)};
  p.validate();
  return p;
}

inline CompositeProblem make_lasso(const LassoSpec& s) {
  require(s.l1_weight >= 0.0, "lasso generator: l1 weight must be >= 0");
  std::mt19937_64 rng(s.base.seed);
  DecisionVector x_true;
  LeastSquaresTerms terms = detail::least_squares_terms(s.base, rng, x_true);
  const DecisionVector ls = terms.rows.colPivHouseholderQr().solve(terms.targets);
  CompositeProblem p;
  p.name = "lasso";
  p.f = SmoothFiniteSum(std::move(terms));
  p.h = L1Term{s.l1_weight};
  p.x0 = ls + s.base.x0_distance * detail::random_unit(s.base.dim, rng);
  p.validate();
  const DecisionVector opt = reference_minimizer(p);
  p.optimum = KnownOptimum{opt, p.psi(opt)};
  return p;
}

inline CompositeProblem make_logistic(const LogisticSpec& s) {
  require(s.dim > 0 && s.components > 0 && s.radius > 0.0, "logistic generator: invalid sizes");
  std::mt19937_64 rng(s.seed);
  const Eigen::MatrixXd features = detail::gaussian_matrix(s.components, s.dim, rng);
  const Eigen::VectorXd w_true = detail::gaussian_matrix(s.dim, 1, rng).col(0) * 2.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd labels(s.components);
  for (Eigen::Index i = 0; i < s.components; ++i) {
    const double y = features.row(i).dot(w_true) >= 0.0 ? 1.0 : -1.0;
    labels[i] = u(rng) < s.label_noise ? -y : y;
  }
  CompositeProblem p;
  p.name = "logistic";
  p.f = SmoothFiniteSum(LogisticTerms{features, labels});
  p.set = Ball{DecisionVector::Zero(s.dim), s.radius};
  p.x0 = DecisionVector::Zero(s.dim);
  p.validate();
  const DecisionVector opt = reference_minimizer(p);
  p.optimum = KnownOptimum{opt, p.psi(opt)};
  return p;
}

}  // namespace sacfgm
