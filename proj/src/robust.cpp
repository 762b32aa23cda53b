#include "addfit/robust.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace addfit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxCondition = 1e12;

struct PooledRow {
  int pair = 0;      // index into the active-pair list
  double kw = 0.0;   // kernel weight
  double delta = 0.0;
  double y = 0.0;
};

// Huberized absolute value matching the IRLS floor: quadratic below delta.
double smooth_abs(double r, double delta) {
  double a = std::abs(r);
  if (a >= delta) return a;
  return 0.5 * (r * r + delta * delta) / delta;
}

// Weighted least squares on (intercept-per-pair, shared slope on delta).
// Parameter layout: [alpha_0 .. alpha_{P-1}, beta0].
Eigen::VectorXd solve_wls(const std::vector<PooledRow>& rows,
                          const std::vector<double>& row_wt, int npairs,
                          double x) {
  const int p = npairs + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (size_t i = 0; i < rows.size(); ++i) {
    const PooledRow& r = rows[i];
    double w = row_wt[i];
    int ai = r.pair;
    a(ai, ai) += w;
    a(ai, p - 1) += w * r.delta;
    a(p - 1, ai) += w * r.delta;
    a(p - 1, p - 1) += w * r.delta * r.delta;
    b[ai] += w * r.y;
    b[p - 1] += w * r.delta * r.y;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smin = svd.singularValues()(p - 1);
  double smax = svd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin > kMaxCondition)
    throw SingularLocalDesign("pooled local design is rank deficient", x);
  return svd.solve(b);
}

}  // namespace

RobustFitPoint robust_fit_point(const std::vector<DiffPair>& pairs,
                                const KernelSpec& kernel, double x,
                                const RobustOptions& opts) {
  kernel.validate();
  if (pairs.empty()) throw ConfigError("no difference pairs supplied");
  const double h = kernel.bandwidth;
  const int npairs = static_cast<int>(pairs.size());

  std::vector<PooledRow> rows;
  std::vector<int> active;  // pair index -> slot, -1 if no window
  active.assign(npairs, -1);
  int nactive = 0;
  double pooled_sum = 0.0, pooled_ss = 0.0;
  long pooled_n = 0;
  for (int k = 0; k < npairs; ++k) {
    const DiffPair& pr = pairs[k];
    const long n = pr.x_partner.size();
    pooled_n += n;
    pooled_sum += pr.y_diff.sum();
    pooled_ss += pr.y_diff.squaredNorm();
    for (long g = 0; g < n; ++g) {
      double kw = evaluate(kernel, (pr.x_partner[g] - x) / h) / h;
      if (kw <= 0.0) continue;
      if (active[k] < 0) active[k] = nactive++;
      rows.push_back({active[k], kw, pr.delta[g], pr.y_diff[g]});
    }
  }
  if (static_cast<int>(rows.size()) < npairs + 1)
    throw SingularLocalDesign("pooled in-window count below parameter count", x);
  double max_delta = 0.0;
  for (const auto& r : rows) max_delta = std::max(max_delta, std::abs(r.delta));
  if (max_delta == 0.0)
    throw NonIdentifiable("all in-window deltas are zero; slope not identifiable");

  // smoothing floor from the pooled response scale: delta_factor * sd(y_diff)
  double mean = pooled_sum / static_cast<double>(pooled_n);
  double var = pooled_ss / static_cast<double>(pooled_n) - mean * mean;
  double delta_floor = opts.delta_factor * std::sqrt(std::max(var, 1e-300));

  const int p = nactive + 1;
  std::vector<double> wt(rows.size());

  // start from the kernel-weighted least squares solution
  for (size_t i = 0; i < rows.size(); ++i) wt[i] = rows[i].kw;
  Eigen::VectorXd params = solve_wls(rows, wt, nactive, x);

  RobustFitPoint out;
  out.x = x;
  out.irls_iterations = 0;
  out.converged = false;

  auto objective = [&](const Eigen::VectorXd& q) {
    double acc = 0.0;
    for (const auto& r : rows)
      acc += r.kw * smooth_abs(r.y - q[r.pair] - q[p - 1] * r.delta, delta_floor);
    return acc;
  };
  out.objective_history.push_back(objective(params));

  for (int it = 0; it < opts.max_iter; ++it) {
    for (size_t i = 0; i < rows.size(); ++i) {
      const PooledRow& r = rows[i];
      double resid = r.y - params[r.pair] - params[p - 1] * r.delta;
      wt[i] = r.kw / std::max(std::abs(resid), delta_floor);
    }
    Eigen::VectorXd next = solve_wls(rows, wt, nactive, x);
    double change = (next - params).cwiseAbs().maxCoeff();
    params = std::move(next);
    out.irls_iterations = it + 1;
    out.objective_history.push_back(objective(params));
    if (change < opts.param_tol) {
      out.converged = true;
      break;
    }
  }

  out.beta0 = params[p - 1];
  out.alpha = Eigen::VectorXd::Constant(npairs, kNaN);
  for (int k = 0; k < npairs; ++k)
    if (active[k] >= 0) out.alpha[k] = params[active[k]];
  return out;
}

ComponentEstimate robust_component(const PanelData& panel, int base,
                                   const KernelSpec& kernel,
                                   const Eigen::VectorXd& grid,
                                   const RobustOptions& opts) {
  panel.validate();
  const int J = static_cast<int>(panel.replicates());
  if (base < 0 || base >= J) throw BadReplicateIndex("base replicate out of range");

  std::vector<DiffPair> pairs;
  pairs.reserve(J - 1);
  for (int k = 0; k < J; ++k)
    if (k != base) pairs.push_back(make_diff_pair(panel, base, k));

  DerivativeCurve curve;
  curve.grid = grid;
  curve.values = Eigen::VectorXd::Constant(grid.size(), kNaN);
  for (long p = 0; p < grid.size(); ++p) {
    try {
      curve.values[p] = robust_fit_point(pairs, kernel, grid[p], opts).beta0;
    } catch (const SingularLocalDesign&) {
    } catch (const NonIdentifiable&) {
    }
  }
  ComponentEstimate est = integrate_component(curve, panel.x.col(base));
  est.component = base;
  return est;
}

ComponentEstimate robust_component(const PanelData& panel, int base,
                                   const KernelSpec& kernel,
                                   const GridPolicy& policy,
                                   const RobustOptions& opts) {
  return robust_component(panel, base, kernel,
                          make_grid(panel.pooled_x(), policy), opts);
}

}  // namespace addfit
