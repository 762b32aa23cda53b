#pragma once

#include <Eigen/Core>
#include <vector>

#include "addfit/curves.hpp"
#include "addfit/integrator.hpp"
#include "addfit/kernels.hpp"
#include "addfit/panel.hpp"
#include "addfit/varcoef.hpp"

namespace addfit {

// Minimizer of the pooled weighted L1 objective at one point x:
//   sum_k sum_g |y^(k)_g - alpha_k - beta0 * delta_gk| K_h(X_gk - x).
struct RobustFitPoint {
  double x = 0.0;
  Eigen::VectorXd alpha;  // one intercept per pair; NaN if pair had no window
  double beta0 = 0.0;     // shared slope, estimates the derivative
  int irls_iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // smoothed-L1 objective per iteration
};

struct RobustOptions {
  double delta_factor = 1e-6;  // smoothing floor = factor * sd(pooled y_diff)
  int max_iter = 50;
  double param_tol = 1e-8;
};

/// IRLS fit of the pooled local-constant L1 objective, started from the
/// weighted least squares solution.
RobustFitPoint robust_fit_point(const std::vector<DiffPair>& pairs,
                                const KernelSpec& kernel, double x,
                                const RobustOptions& opts = {});

/// Robust derivative curve over the grid, integrated into a component
/// estimate. Per-point failures are marked missing.
ComponentEstimate robust_component(const PanelData& panel, int base,
                                   const KernelSpec& kernel,
                                   const Eigen::VectorXd& grid,
                                   const RobustOptions& opts = {});

ComponentEstimate robust_component(const PanelData& panel, int base,
                                   const KernelSpec& kernel,
                                   const GridPolicy& policy = {},
                                   const RobustOptions& opts = {});

}  // namespace addfit
