#pragma once

#include <Eigen/Core>

namespace addfit {

// A function sampled on an increasing grid. NaN marks invalid points.
struct DerivativeCurve {
  Eigen::VectorXd grid;
  Eigen::VectorXd values;
};

// Evaluation grid: equispaced points spanning a central quantile range of
// the pooled covariate values.
struct GridPolicy {
  int points = 100;
  double lower_quantile = 0.02;
  double upper_quantile = 0.98;
};

/// Type-7 quantile of an unsorted sample.
double quantile(const Eigen::VectorXd& sample, double q);

/// Equispaced grid over the policy's quantile range of `pooled`.
Eigen::VectorXd make_grid(const Eigen::VectorXd& pooled, const GridPolicy& policy);

/// Piecewise-linear interpolation on an increasing grid; clamps outside.
double interp_clamped(const Eigen::VectorXd& grid, const Eigen::VectorXd& values,
                      double x);

/// Sample standard deviation (n-1 denominator; 0 for n < 2).
double sample_sd(const Eigen::VectorXd& v);

/// Rule-of-thumb bandwidth factor * sd(x) * n^(-1/5).
double rule_of_thumb_bandwidth(const Eigen::VectorXd& x, double factor);

}  // namespace addfit
