#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "addfit/kernels.hpp"

namespace addfit {

enum class EvalMode { AtDesignPoints, AtGrid };

// Local-linear smoothing plan for one covariate column.
struct SmootherPlan {
  Eigen::VectorXd design_points;  // X_.j, length G
  KernelSpec kernel;
  EvalMode mode = EvalMode::AtDesignPoints;
};

/// Equivalent-kernel row s^T = e1^T (X^T K X)^{-1} X^T K at x.
/// The returned vector has length G, is zero outside [x-h, x+h], sums to 1
/// and satisfies sum w_g (X_g - x) = 0.
Eigen::VectorXd equivalent_kernel_row(const SmootherPlan& plan, double x);

/// Apply the smoother at every design point: fitted_g = s_{X_g}^T y.
Eigen::VectorXd smooth(const SmootherPlan& plan, const Eigen::VectorXd& y);

/// Centered smoother S* = (I - 11^T/G) S: smooth then remove the sample mean.
Eigen::VectorXd centered_smooth(const SmootherPlan& plan, const Eigen::VectorXd& y);

/// Maximum-row-sum norm ||S_a* S_b*|| on a uniformly subsampled design of
/// size `subsample`. Values below 1 indicate the backfitting existence
/// condition holds on the subsample.
double backfit_norm_diagnostic(const SmootherPlan& plan_a, const SmootherPlan& plan_b,
                               int subsample);

// Reusable smoother bound to one design. Rows are generated on demand; when
// the total window size is modest they are cached so repeated applications
// (backfitting sweeps) cost one sparse mat-vec instead of a rebuild.
class LocalLinearSmoother {
public:
  LocalLinearSmoother(Eigen::VectorXd design, KernelSpec kernel);

  long size() const { return static_cast<long>(x_sorted_.size()); }

  /// In-window weights at x: parallel arrays of original indices and weights.
  /// Throws SingularLocalDesign if fewer than 2 distinct points carry weight.
  void row_at(double x, std::vector<int>& idx, std::vector<double>& w) const;

  Eigen::VectorXd apply(const Eigen::VectorXd& y) const;
  Eigen::VectorXd apply_centered(const Eigen::VectorXd& y) const;

private:
  void compile() const;

  std::vector<double> x_sorted_;
  std::vector<int> perm_;  // sorted position -> original index
  Eigen::VectorXd design_;
  KernelSpec kernel_;

  // lazily built CSR rows at the design points
  mutable bool compiled_ = false;
  mutable bool cacheable_ = true;
  mutable std::vector<long> row_start_;
  mutable std::vector<int> cols_;
  mutable std::vector<double> wts_;
};

}  // namespace addfit
