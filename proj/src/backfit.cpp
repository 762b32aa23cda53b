#include "addfit/backfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "addfit/smoother.hpp"

namespace addfit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double default_tol(double tol, const Eigen::VectorXd& y) {
  if (tol > 0.0) return tol;
  double sd = sample_sd(y);
  return 1e-6 * (sd > 0.0 ? sd : 1.0);
}

// Collapse fitted values at design points onto a sorted, deduplicated grid.
// Equal design points always receive equal fits, so keeping the first of
// each run loses nothing.
ComponentEstimate design_point_estimate(const Eigen::VectorXd& design,
                                        const Eigen::VectorXd& fit) {
  const long n = design.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return design[a] < design[b]; });

  std::vector<double> gx, gv;
  gx.reserve(n);
  gv.reserve(n);
  for (long i = 0; i < n; ++i) {
    double x = design[order[i]];
    if (!gx.empty() && x == gx.back()) continue;
    gx.push_back(x);
    gv.push_back(fit[order[i]]);
  }
  ComponentEstimate est;
  est.grid = Eigen::Map<Eigen::VectorXd>(gx.data(), gx.size());
  est.values = Eigen::Map<Eigen::VectorXd>(gv.data(), gv.size());
  est.derivative = Eigen::VectorXd::Constant(est.grid.size(), kNaN);
  est.centering_constant = 0.0;
  return est;
}

}  // namespace

BackfitState backfit_pair(const DiffPair& pair, const KernelSpec& kernel_base,
                          const KernelSpec& kernel_partner, double tol,
                          int max_iter) {
  const long n = pair.y_diff.size();
  if (pair.x_partner.size() != n || pair.delta.size() != n)
    throw LengthMismatch("diff pair vectors must share one length");
  if (max_iter < 1) throw ConfigError("max_iter must be positive");

  const Eigen::VectorXd x_base = pair.x_partner + pair.delta;
  LocalLinearSmoother sm_base(x_base, kernel_base);
  LocalLinearSmoother sm_partner(pair.x_partner, kernel_partner);
  const Eigen::VectorXd& y = pair.y_diff;
  const double eps = default_tol(tol, y);

  BackfitState st;
  st.base_fit = Eigen::VectorXd::Zero(n);
  st.partner_fit = Eigen::VectorXd::Zero(n);
  st.change_history.reserve(max_iter);

  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd new_base = sm_base.apply_centered(y + st.partner_fit);
    Eigen::VectorXd new_partner = sm_partner.apply_centered(new_base - y);
    double change = std::max((new_base - st.base_fit).cwiseAbs().maxCoeff(),
                             (new_partner - st.partner_fit).cwiseAbs().maxCoeff());
    st.base_fit = std::move(new_base);
    st.partner_fit = std::move(new_partner);
    st.iterations = it + 1;
    st.sup_change = change;
    st.change_history.push_back(change);
    if (change <= eps) {
      st.converged = true;
      break;
    }
  }
  return st;
}

PooledBackfitResult pooled_backfit(const PanelData& panel, int base,
                                   const std::vector<KernelSpec>& kernels,
                                   double tol, int max_iter) {
  panel.validate();
  const int J = static_cast<int>(panel.replicates());
  if (base < 0 || base >= J) throw BadReplicateIndex("base replicate out of range");
  if (static_cast<int>(kernels.size()) != J)
    throw LengthMismatch("need one kernel spec per replicate");

  PooledBackfitResult res;
  res.fit_at_design = Eigen::VectorXd::Zero(panel.units());
  for (int k = 0; k < J; ++k) {
    if (k == base) continue;
    DiffPair pair = make_diff_pair(panel, base, k);
    BackfitState st = backfit_pair(pair, kernels[base], kernels[k], tol, max_iter);
    res.fit_at_design += st.base_fit;
    res.partners.push_back(k);
    res.pair_converged.push_back(st.converged ? 1 : 0);
  }
  res.fit_at_design /= static_cast<double>(J - 1);

  res.estimate = design_point_estimate(panel.x.col(base), res.fit_at_design);
  res.estimate.component = base;
  res.estimate.converged =
      std::all_of(res.pair_converged.begin(), res.pair_converged.end(),
                  [](uint8_t c) { return c != 0; });
  return res;
}

StarPanel make_star_panel(const PanelData& panel) {
  panel.validate();
  StarPanel star;
  star.x = panel.x;
  star.y_star = panel.y;
  Eigen::VectorXd rowmean = panel.y.rowwise().mean();
  star.y_star.colwise() -= rowmean;
  return star;
}

JvariateSystem backfit_jvariate_system(const StarPanel& star, int j,
                                       const std::vector<KernelSpec>& kernels,
                                       double tol, int max_iter) {
  const int J = static_cast<int>(star.x.cols());
  const long n = star.x.rows();
  if (j < 0 || j >= J) throw BadReplicateIndex("system index out of range");
  if (static_cast<int>(kernels.size()) != J)
    throw LengthMismatch("need one kernel spec per replicate");
  if (max_iter < 1) throw ConfigError("max_iter must be positive");

  std::vector<LocalLinearSmoother> sm;
  sm.reserve(J);
  for (int k = 0; k < J; ++k) sm.emplace_back(star.x.col(k), kernels[k]);

  const Eigen::VectorXd y = star.y_star.col(j);
  const double eps = default_tol(tol, y);

  JvariateSystem sys;
  sys.star_fits.assign(J, Eigen::VectorXd::Zero(n));
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);

  for (int it = 0; it < max_iter; ++it) {
    double change = 0.0;
    for (int k = 0; k < J; ++k) {
      Eigen::VectorXd partial = y - (total - sys.star_fits[k]);
      Eigen::VectorXd updated = sm[k].apply_centered(partial);
      change = std::max(change, (updated - sys.star_fits[k]).cwiseAbs().maxCoeff());
      total += updated - sys.star_fits[k];
      sys.star_fits[k] = std::move(updated);
    }
    sys.iterations = it + 1;
    sys.sup_change = change;
    if (change <= eps) {
      sys.converged = true;
      break;
    }
  }
  return sys;
}

std::vector<ComponentEstimate> backfit_jvariate(const StarPanel& star,
                                                const std::vector<KernelSpec>& kernels,
                                                double tol, int max_iter) {
  const int J = static_cast<int>(star.x.cols());
  if (J < 2) throw ConfigError("star panel needs at least 2 replicates");

  std::vector<ComponentEstimate> out;
  out.reserve(J);
  for (int j = 0; j < J; ++j) {
    JvariateSystem sys = backfit_jvariate_system(star, j, kernels, tol, max_iter);
    // m_hat_j = J/(J-1) * diagonal star fit
    Eigen::VectorXd fit =
        (static_cast<double>(J) / (J - 1)) * sys.star_fits[j];
    ComponentEstimate est = design_point_estimate(star.x.col(j), fit);
    est.component = j;
    est.converged = sys.converged;
    out.push_back(std::move(est));
  }
  return out;
}

std::vector<KernelSpec> backfit_bandwidths(const PanelData& panel, KernelFamily family,
                                           double c) {
  const int J = static_cast<int>(panel.replicates());
  std::vector<KernelSpec> ks(J);
  for (int j = 0; j < J; ++j) {
    ks[j].family = family;
    ks[j].bandwidth = rule_of_thumb_bandwidth(panel.x.col(j), c);
  }
  return ks;
}

}  // namespace addfit
