#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "addfit/curves.hpp"
#include "addfit/integrator.hpp"
#include "addfit/kernels.hpp"
#include "addfit/panel.hpp"

namespace addfit {

enum class Method { Integration, Backfit, Robust };

Method method_from_name(const std::string& name);
std::string method_name(Method m);

// Generator parameters for the simulation study: G units, J replicates,
// covariates tied together through X_gk = X_g1 - b_G u_gk with b_G = G^-gamma.
struct SimConfig {
  long G = 3000;
  int J = 3;
  double gamma = 0.2;
  double sigma_eps = 1.0;
  std::uint64_t seed = 1;
  int reps = 50;

  double integration_h_factor = 1.0;   // h = f * sd(pooled X) * G^(-1/5)
  double backfit_h_factor = 0.4 * 1.06;
  KernelFamily kernel = KernelFamily::Epanechnikov;
  GridPolicy grid;
  int backfit_max_iter = 200;

  double b_G() const { return std::pow(static_cast<double>(G), -gamma); }

  void validate() const;
};

// Everything the generator knows that an estimator must not see.
struct PanelTruth {
  Eigen::VectorXd alpha;   // G
  Eigen::MatrixXd u;       // G x (J-1), working-model noises for k >= 2
  Eigen::MatrixXd m_true;  // G x J, m_j(X_gj)
};

struct SimulatedPanel {
  PanelData panel;
  PanelTruth truth;
};

/// True component function j (0-based; the three shipped shapes repeat
/// cyclically for j >= 3).
double true_component(int j, double x);

/// Draw one panel from the built-in mixture design; `rep` selects the Monte Carlo
/// substreams so that panels are independent and reproducible per rep.
SimulatedPanel generate_panel(const SimConfig& cfg, int rep = 0);

/// MSE(m_hat_j) = G^{-1} sum_g (m_hat_j(X_gj) - m_j(X_gj))^2, with the
/// estimate interpolated on its grid.
double mse_component(const ComponentEstimate& estimate,
                     const std::function<double(double)>& truth,
                     const Eigen::VectorXd& observed_x);

double mse_alpha(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& alpha_true);

struct MethodSummary {
  std::map<std::string, double> median_mse;  // keys m1..mJ, alpha
  int failures = 0;        // reps lost to estimator errors
  int nonconverged = 0;    // reps where some backfit/IRLS did not converge
  int used_reps = 0;
  std::vector<std::string> failure_messages;
};

struct MseReport {
  SimConfig config;
  std::vector<Method> methods;
  std::map<std::string, MethodSummary> summaries;  // keyed by method name

  std::string to_json_string() const;  // deterministic, full precision
  std::string to_table() const;        // aligned text table
};

/// Run the Monte Carlo comparison: per rep, generate a panel, fit every
/// requested method, compute all MSEs; aggregate medians. Deterministic
/// given the config (including seed). Reps run concurrently; the
/// ADDFIT_THREADS environment variable caps the worker count.
MseReport run_comparison(const SimConfig& cfg, const std::vector<Method>& methods);

}  // namespace addfit
