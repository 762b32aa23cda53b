#include "addfit/smoother.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "addfit/errors.hpp"

namespace addfit {

namespace {

constexpr long kMaxCachedEntries = 1L << 26;  // ~512 MB of weights

struct WindowSums {
  long lo = 0, hi = 0;  // sorted-index range [lo, hi)
  double s0 = 0, s1 = 0, s2 = 0;
  int distinct = 0;
};

// Locate the points with positive kernel weight around x and accumulate the
// weighted moments of (X - x).
WindowSums window_sums(const std::vector<double>& xs, const KernelSpec& kernel,
                       double x) {
  const double h = kernel.bandwidth;
  WindowSums w;
  w.lo = std::lower_bound(xs.begin(), xs.end(), x - h) - xs.begin();
  w.hi = std::upper_bound(xs.begin(), xs.end(), x + h) - xs.begin();
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (long i = w.lo; i < w.hi; ++i) {
    double kv = evaluate(kernel, (xs[i] - x) / h);
    if (kv <= 0.0) continue;
    double d = xs[i] - x;
    w.s0 += kv;
    w.s1 += kv * d;
    w.s2 += kv * d * d;
    if (xs[i] != prev) {
      ++w.distinct;
      prev = xs[i];
    }
  }
  return w;
}

}  // namespace

LocalLinearSmoother::LocalLinearSmoother(Eigen::VectorXd design, KernelSpec kernel)
    : design_(std::move(design)), kernel_(kernel) {
  kernel_.validate();
  if (design_.size() < 2)
    throw ConfigError("smoother needs at least 2 design points");
  if (!design_.allFinite())
    throw ConfigError("smoother design points must be finite");
  const long n = design_.size();
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), 0);
  std::sort(perm_.begin(), perm_.end(),
            [&](int a, int b) { return design_[a] < design_[b]; });
  x_sorted_.resize(n);
  for (long i = 0; i < n; ++i) x_sorted_[i] = design_[perm_[i]];
}

void LocalLinearSmoother::row_at(double x, std::vector<int>& idx,
                                 std::vector<double>& w) const {
  idx.clear();
  w.clear();
  const double h = kernel_.bandwidth;
  WindowSums s = window_sums(x_sorted_, kernel_, x);
  if (s.distinct < 2)
    throw SingularLocalDesign(
        "local design singular: fewer than 2 distinct in-window points", x);
  double det = s.s0 * s.s2 - s.s1 * s.s1;
  if (!(det > 0.0))
    throw SingularLocalDesign("local design singular: zero normal determinant", x);
  for (long i = s.lo; i < s.hi; ++i) {
    double kv = evaluate(kernel_, (x_sorted_[i] - x) / h);
    if (kv <= 0.0) continue;
    double d = x_sorted_[i] - x;
    idx.push_back(perm_[i]);
    w.push_back(kv * (s.s2 - d * s.s1) / det);
  }
}

void LocalLinearSmoother::compile() const {
  if (compiled_) return;
  const long n = size();
  row_start_.assign(n + 1, 0);
  cols_.clear();
  wts_.clear();
  std::vector<int> idx;
  std::vector<double> w;
  for (long g = 0; g < n; ++g) {
    try {
      row_at(design_[g], idx, w);
    } catch (const SingularLocalDesign& e) {
      throw SingularLocalDesign(e.what(), design_[g], g);
    }
    cols_.insert(cols_.end(), idx.begin(), idx.end());
    wts_.insert(wts_.end(), w.begin(), w.end());
    row_start_[g + 1] = static_cast<long>(cols_.size());
    if (static_cast<long>(cols_.size()) > kMaxCachedEntries) {
      cacheable_ = false;
      cols_.clear();
      wts_.clear();
      row_start_.clear();
      break;
    }
  }
  compiled_ = true;
}

Eigen::VectorXd LocalLinearSmoother::apply(const Eigen::VectorXd& y) const {
  const long n = size();
  if (y.size() != n) throw LengthMismatch("response length differs from design");
  compile();
  Eigen::VectorXd out(n);
  if (cacheable_) {
    for (long g = 0; g < n; ++g) {
      double acc = 0.0;
      for (long p = row_start_[g]; p < row_start_[g + 1]; ++p)
        acc += wts_[p] * y[cols_[p]];
      out[g] = acc;
    }
  } else {
    std::vector<int> idx;
    std::vector<double> w;
    for (long g = 0; g < n; ++g) {
      try {
        row_at(design_[g], idx, w);
      } catch (const SingularLocalDesign& e) {
        throw SingularLocalDesign(e.what(), design_[g], g);
      }
      double acc = 0.0;
      for (size_t p = 0; p < idx.size(); ++p) acc += w[p] * y[idx[p]];
      out[g] = acc;
    }
  }
  return out;
}

Eigen::VectorXd LocalLinearSmoother::apply_centered(const Eigen::VectorXd& y) const {
  Eigen::VectorXd f = apply(y);
  f.array() -= f.mean();
  return f;
}

Eigen::VectorXd equivalent_kernel_row(const SmootherPlan& plan, double x) {
  LocalLinearSmoother sm(plan.design_points, plan.kernel);
  std::vector<int> idx;
  std::vector<double> w;
  sm.row_at(x, idx, w);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(plan.design_points.size());
  for (size_t p = 0; p < idx.size(); ++p) row[idx[p]] = w[p];
  return row;
}

Eigen::VectorXd smooth(const SmootherPlan& plan, const Eigen::VectorXd& y) {
  LocalLinearSmoother sm(plan.design_points, plan.kernel);
  return sm.apply(y);
}

Eigen::VectorXd centered_smooth(const SmootherPlan& plan, const Eigen::VectorXd& y) {
  LocalLinearSmoother sm(plan.design_points, plan.kernel);
  return sm.apply_centered(y);
}

double backfit_norm_diagnostic(const SmootherPlan& plan_a, const SmootherPlan& plan_b,
                               int subsample) {
  const long n = plan_a.design_points.size();
  if (plan_b.design_points.size() != n)
    throw LengthMismatch("diagnostic plans must share the design size");
  if (subsample < 2 || subsample > n)
    throw ConfigError("diagnostic subsample must be in [2, G]");

  // joint uniform subsample over the original unit index
  const long m = subsample;
  Eigen::VectorXd xa(m), xb(m);
  for (long i = 0; i < m; ++i) {
    long g = (m == 1) ? 0 : (i * (n - 1)) / (m - 1);
    xa[i] = plan_a.design_points[g];
    xb[i] = plan_b.design_points[g];
  }

  auto dense_centered = [&](const Eigen::VectorXd& xs, const KernelSpec& kernel) {
    LocalLinearSmoother sm(xs, kernel);
    Eigen::MatrixXd s(m, m);
    std::vector<int> idx;
    std::vector<double> w;
    for (long i = 0; i < m; ++i) {
      sm.row_at(xs[i], idx, w);
      s.row(i).setZero();
      for (size_t p = 0; p < idx.size(); ++p) s(i, idx[p]) = w[p];
    }
    Eigen::RowVectorXd colmean = s.colwise().mean();
    s.rowwise() -= colmean;
    return s;
  };

  Eigen::MatrixXd sa = dense_centered(xa, plan_a.kernel);
  Eigen::MatrixXd sb = dense_centered(xb, plan_b.kernel);
  Eigen::MatrixXd prod = sa * sb;
  return prod.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace addfit
