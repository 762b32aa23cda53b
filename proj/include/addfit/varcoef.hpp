#pragma once

#include <Eigen/Core>
#include <vector>

#include "addfit/curves.hpp"
#include "addfit/kernels.hpp"
#include "addfit/panel.hpp"

namespace addfit {

// One replicate difference Y_.j - Y_.k with its covariate gap.
struct DiffPair {
  int base_index = 0;     // j, the component being targeted
  int partner_index = 0;  // k != j, the smoothing covariate
  Eigen::VectorXd y_diff;     // Y_gj - Y_gk
  Eigen::VectorXd x_partner;  // X_gk
  Eigen::VectorXd delta;      // X_gj - X_gk
};

// Varying-coefficient fit theta(x) = (a0, a1, b0, b1) on an evaluation grid.
// b0 estimates the derivative of the base component.
struct ThetaGrid {
  Eigen::VectorXd grid;
  Eigen::MatrixXd theta;          // M x 4; NaN rows where invalid
  Eigen::VectorXi window_counts;  // in-window observations per grid point
  std::vector<uint8_t> valid;
};

DiffPair make_diff_pair(const PanelData& panel, int j, int k);

/// Local WLS of y_diff on (1, X_gk - x, delta, delta*(X_gk - x)) with
/// weights K_h(X_gk - x), solved per grid point from a column-scaled 4x4
/// system. Singular points are marked invalid rather than aborting.
ThetaGrid fit_theta(const DiffPair& pair, const KernelSpec& kernel,
                    const Eigen::VectorXd& grid);

/// Extract the derivative column (b0); invalid points become NaN.
DerivativeCurve derivative_estimate(const ThetaGrid& theta);

/// Pointwise mean over curves sharing one grid, skipping missing values.
/// A point is missing only if it is missing in every curve.
DerivativeCurve average_derivative(const std::vector<DerivativeCurve>& curves);

}  // namespace addfit
