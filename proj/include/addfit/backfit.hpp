#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "addfit/integrator.hpp"
#include "addfit/kernels.hpp"
#include "addfit/panel.hpp"
#include "addfit/varcoef.hpp"

namespace addfit {

// State of one bivariate backfitting run on a replicate difference.
// base_fit estimates m_j at X_.j, partner_fit estimates m_k at X_.k; both
// have zero sample mean by construction of the centered smoother.
struct BackfitState {
  Eigen::VectorXd base_fit;
  Eigen::VectorXd partner_fit;
  int iterations = 0;
  double sup_change = 0.0;
  bool converged = false;
  std::vector<double> change_history;
  std::optional<double> norm_diag;
};

/// Gauss-Seidel backfitting for y_diff = m_j(X_j) - m_k(X_k):
///   m_j <- S_j*(y + m_k),  m_k <- S_k*(m_j - y)
/// starting from zero vectors, until the sup-norm update <= tol or max_iter.
/// Non-convergence is a reported outcome, not an error. tol <= 0 selects
/// 1e-6 * sd(y_diff).
BackfitState backfit_pair(const DiffPair& pair, const KernelSpec& kernel_base,
                          const KernelSpec& kernel_partner, double tol = -1.0,
                          int max_iter = 200);

struct PooledBackfitResult {
  ComponentEstimate estimate;            // on the sorted unique design points
  Eigen::VectorXd fit_at_design;         // m_hat_j at X_.j, original order
  std::vector<int> partners;
  std::vector<uint8_t> pair_converged;   // per partner k
};

/// Pooled backfitting estimator: average of the base fits over all partners.
PooledBackfitResult pooled_backfit(const PanelData& panel, int base,
                                   const std::vector<KernelSpec>& kernels,
                                   double tol = -1.0, int max_iter = 200);

// Row-centered panel Y*_gj = Y_gj - mean_j Y_gj; removes the unit effects.
struct StarPanel {
  Eigen::MatrixXd y_star;  // G x J, rows sum to ~0
  Eigen::MatrixXd x;       // G x J covariates
};

StarPanel make_star_panel(const PanelData& panel);

// Full solution of one J-variate star system (response column j).
struct JvariateSystem {
  std::vector<Eigen::VectorXd> star_fits;  // m*_{k,j} at X_.k, k = 0..J-1
  int iterations = 0;
  double sup_change = 0.0;
  bool converged = false;
};

JvariateSystem backfit_jvariate_system(const StarPanel& star, int j,
                                       const std::vector<KernelSpec>& kernels,
                                       double tol = -1.0, int max_iter = 200);

/// J-variate backfitting: for each j, solve the star system on Y*_.j and
/// return the rescaled diagonal J/(J-1) * m*_{j,j} as the estimate of m_j.
std::vector<ComponentEstimate> backfit_jvariate(const StarPanel& star,
                                                const std::vector<KernelSpec>& kernels,
                                                double tol = -1.0, int max_iter = 200);

/// Per-component rule-of-thumb bandwidths c * sd(X_.j) * G^(-1/5).
std::vector<KernelSpec> backfit_bandwidths(const PanelData& panel, KernelFamily family,
                                           double c);

}  // namespace addfit
