#pragma once

#include <Eigen/Core>
#include <vector>

#include "addfit/curves.hpp"
#include "addfit/kernels.hpp"
#include "addfit/panel.hpp"
#include "addfit/varcoef.hpp"

namespace addfit {

// One additive component on a grid, empirically centered so that the mean
// of the interpolated values over the observed covariates is zero.
struct ComponentEstimate {
  int component = -1;           // replicate index j
  Eigen::VectorXd grid;
  Eigen::VectorXd values;       // m_hat(grid)
  Eigen::VectorXd derivative;   // m_hat'(grid); NaN when not estimated
  double centering_constant = 0.0;
  long clamped_points = 0;      // observed x outside the grid span
  double coverage = 1.0;        // fraction of observed x inside the span
  bool converged = true;        // iterative methods flag non-convergence

  /// Interpolated value at x (flat extrapolation outside the grid).
  double at(double x) const { return interp_clamped(grid, values, x); }
};

/// Cumulative trapezoid integral of the derivative curve from the left end
/// of its largest valid contiguous sub-range, centered by the mean of the
/// integral interpolated at the observed covariates.
ComponentEstimate integrate_component(const DerivativeCurve& derivative,
                                      const Eigen::VectorXd& observed_x,
                                      double min_coverage = 0.9);

/// Integration estimator for every component: difference against all
/// partners, fit the varying-coefficient model, average the derivative
/// curves and integrate against the empirical distribution of X_.j.
std::vector<ComponentEstimate> estimate_all_components(const PanelData& panel,
                                                       const KernelSpec& kernel,
                                                       const GridPolicy& policy = {});

struct TreatmentEffects {
  Eigen::VectorXd alpha;       // length G
  long clamped_evaluations = 0;  // component lookups outside a grid span
};

/// alpha_g = J^{-1} sum_j (Y_gj - m_hat_j(X_gj)).
TreatmentEffects estimate_treatment_effects(const PanelData& panel,
                                            const std::vector<ComponentEstimate>& components);

}  // namespace addfit
