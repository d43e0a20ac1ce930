#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's own formulas for the quantity under test.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

/// Golden-section minimization of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Monte-Carlo mean of ||G_i - mean||^2 over uniform single draws, given all
/// component gradients as rows.
inline double monte_carlo_point_variance(const Eigen::MatrixXd& grads, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, grads.rows() - 1);
  // Two-pass over the draws: sample mean, then second moment about it.
  std::vector<Eigen::Index> idx(draws);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(grads.cols());
  for (auto& i : idx) {
    i = pick(rng);
    mean += grads.row(i);
  }
  mean /= static_cast<double>(draws);
  double acc = 0.0;
  for (auto i : idx) acc += (grads.row(i) - mean).squaredNorm();
  return acc / static_cast<double>(draws);
}

inline double monte_carlo_scalar_variance(const Eigen::VectorXd& values, std::size_t draws, std::uint64_t seed) {
  Eigen::MatrixXd rows(values.size(), 1);
  rows.col(0) = values;
  return monte_carlo_point_variance(rows, draws, seed);
}

/// Least-squares slope of log(gap) against log(k).
inline double loglog_slope(const std::vector<double>& ks, const std::vector<double>& gaps) {
  const double n = static_cast<double>(ks.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double x = std::log(ks[i]), y = std::log(gaps[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
