#include "addfit/varcoef.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace addfit {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxCondition = 1e12;
}  // namespace

DiffPair make_diff_pair(const PanelData& panel, int j, int k) {
  panel.validate();
  const int J = static_cast<int>(panel.replicates());
  if (j < 0 || j >= J || k < 0 || k >= J || j == k)
    throw BadReplicateIndex("replicate indices must be distinct and within [0, J)");
  DiffPair pair;
  pair.base_index = j;
  pair.partner_index = k;
  pair.y_diff = panel.y.col(j) - panel.y.col(k);
  pair.x_partner = panel.x.col(k);
  pair.delta = panel.x.col(j) - panel.x.col(k);
  return pair;
}

// Weighted least squares of y on (1, X_k - x, delta, delta*(X_k - x)) with
// kernel weights, per grid point. Columns are rescaled by (1, h, s, h*s)
// before solving; delta is of order b_G, so the raw system is
// catastrophically ill conditioned.
ThetaGrid fit_theta(const DiffPair& pair, const KernelSpec& kernel,
                    const Eigen::VectorXd& grid) {
  kernel.validate();
  const long n = pair.x_partner.size();
  if (pair.y_diff.size() != n || pair.delta.size() != n)
    throw LengthMismatch("diff pair vectors must share one length");
  for (long i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw GridMismatch("grid must be strictly increasing");

  // sorted view of the smoothing covariate
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(),
            [&](int a, int b) { return pair.x_partner[a] < pair.x_partner[b]; });
  std::vector<double> xs(n);
  for (long i = 0; i < n; ++i) xs[i] = pair.x_partner[perm[i]];

  const double h = kernel.bandwidth;
  const long m = grid.size();
  ThetaGrid out;
  out.grid = grid;
  out.theta = Eigen::MatrixXd::Constant(m, 4, kNaN);
  out.window_counts = Eigen::VectorXi::Zero(m);
  out.valid.assign(m, 0);

  std::vector<long> win;
  for (long p = 0; p < m; ++p) {
    const double x = grid[p];
    long lo = std::lower_bound(xs.begin(), xs.end(), x - h) - xs.begin();
    long hi = std::upper_bound(xs.begin(), xs.end(), x + h) - xs.begin();
    win.clear();
    for (long i = lo; i < hi; ++i)
      if (evaluate(kernel, (xs[i] - x) / h) > 0.0) win.push_back(perm[i]);
    out.window_counts[p] = static_cast<int>(win.size());
    if (win.size() < 4) continue;

    double dmean = 0.0;
    for (long g : win) dmean += pair.delta[g];
    dmean /= static_cast<double>(win.size());
    double dvar = 0.0;
    for (long g : win) {
      double c = pair.delta[g] - dmean;
      dvar += c * c;
    }
    double s_delta = std::sqrt(dvar / static_cast<double>(win.size()));
    if (!(s_delta > 0.0)) continue;  // constant delta: columns 3-4 dependent

    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    Eigen::Vector4d b = Eigen::Vector4d::Zero();
    for (long g : win) {
      double u = pair.x_partner[g] - x;
      double kv = evaluate(kernel, u / h) / h;
      Eigen::Vector4d z(1.0, u / h, pair.delta[g] / s_delta,
                        pair.delta[g] * u / (h * s_delta));
      a.noalias() += kv * z * z.transpose();
      b.noalias() += kv * z * pair.y_diff[g];
    }
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    double smin = svd.singularValues()(3);
    double smax = svd.singularValues()(0);
    if (!(smin > 0.0) || smax / smin > kMaxCondition) continue;
    Eigen::Vector4d v = svd.solve(b);
    out.theta(p, 0) = v[0];
    out.theta(p, 1) = v[1] / h;
    out.theta(p, 2) = v[2] / s_delta;
    out.theta(p, 3) = v[3] / (h * s_delta);
    out.valid[p] = out.theta.row(p).allFinite() ? 1 : 0;
  }
  return out;
}

DerivativeCurve derivative_estimate(const ThetaGrid& theta) {
  DerivativeCurve c;
  c.grid = theta.grid;
  c.values = Eigen::VectorXd::Constant(theta.grid.size(), kNaN);
  for (long p = 0; p < theta.grid.size(); ++p)
    if (theta.valid[p]) c.values[p] = theta.theta(p, 2);
  return c;
}

DerivativeCurve average_derivative(const std::vector<DerivativeCurve>& curves) {
  if (curves.empty()) throw GridMismatch("no derivative curves to average");
  const Eigen::VectorXd& grid = curves.front().grid;
  for (const auto& c : curves) {
    if (c.grid.size() != grid.size() || (c.grid.array() != grid.array()).any())
      throw GridMismatch("derivative curves live on different grids");
    if (c.values.size() != grid.size())
      throw LengthMismatch("curve value/grid size mismatch");
  }
  DerivativeCurve out;
  out.grid = grid;
  out.values = Eigen::VectorXd::Constant(grid.size(), kNaN);
  for (long p = 0; p < grid.size(); ++p) {
    double acc = 0.0;
    int cnt = 0;
    for (const auto& c : curves) {
      if (std::isfinite(c.values[p])) {
        acc += c.values[p];
        ++cnt;
      }
    }
    if (cnt > 0) out.values[p] = acc / cnt;
  }
  return out;
}

}  // namespace addfit
