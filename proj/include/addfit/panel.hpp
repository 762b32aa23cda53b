#pragma once

#include <Eigen/Core>

#include "addfit/errors.hpp"

namespace addfit {

// Replicated panel of model Y_gj = alpha_g + m_j(X_gj) + eps_gj.
// Rows are units (genes), columns are replicates.
struct PanelData {
  Eigen::MatrixXd x;  // G x J covariates
  Eigen::MatrixXd y;  // G x J responses

  long units() const { return x.rows(); }       // G
  long replicates() const { return x.cols(); }  // J

  void validate() const {
    if (x.rows() != y.rows() || x.cols() != y.cols())
      throw ConfigError("panel covariate and response shapes differ");
    if (x.cols() < 2) throw ConfigError("panel needs at least 2 replicates");
    if (x.rows() < 2) throw ConfigError("panel needs at least 2 units");
    if (!x.allFinite() || !y.allFinite())
      throw ConfigError("panel contains non-finite values");
  }

  /// All covariate entries flattened column-major (for pooled statistics).
  Eigen::VectorXd pooled_x() const {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  }
};

}  // namespace addfit
