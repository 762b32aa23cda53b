#include "addfit/curves.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "addfit/errors.hpp"

namespace addfit {

double quantile(const Eigen::VectorXd& sample, double q) {
  if (sample.size() == 0) throw ConfigError("quantile of empty sample");
  std::vector<double> s(sample.data(), sample.data() + sample.size());
  std::sort(s.begin(), s.end());
  if (q <= 0.0) return s.front();
  if (q >= 1.0) return s.back();
  double pos = q * static_cast<double>(s.size() - 1);
  auto lo = static_cast<size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= s.size()) return s.back();
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

Eigen::VectorXd make_grid(const Eigen::VectorXd& pooled, const GridPolicy& policy) {
  if (policy.points < 2) throw ConfigError("grid needs at least 2 points");
  if (!(policy.lower_quantile < policy.upper_quantile))
    throw ConfigError("grid quantiles out of order");
  double lo = quantile(pooled, policy.lower_quantile);
  double hi = quantile(pooled, policy.upper_quantile);
  if (!(lo < hi)) throw ConfigError("degenerate grid range");
  return Eigen::VectorXd::LinSpaced(policy.points, lo, hi);
}

double interp_clamped(const Eigen::VectorXd& grid, const Eigen::VectorXd& values,
                      double x) {
  const long n = grid.size();
  if (n == 0 || values.size() != n)
    throw LengthMismatch("interpolation grid/value size mismatch");
  if (n == 1 || x <= grid[0]) return values[0];
  if (x >= grid[n - 1]) return values[n - 1];
  const double* b = grid.data();
  long hi = std::upper_bound(b, b + n, x) - b;  // grid[hi-1] <= x < grid[hi]
  long lo = hi - 1;
  double span = grid[hi] - grid[lo];
  if (span <= 0.0) return values[lo];
  double t = (x - grid[lo]) / span;
  return values[lo] + t * (values[hi] - values[lo]);
}

double sample_sd(const Eigen::VectorXd& v) {
  const long n = v.size();
  if (n < 2) return 0.0;
  double mean = v.mean();
  double ss = (v.array() - mean).square().sum();
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double rule_of_thumb_bandwidth(const Eigen::VectorXd& x, double factor) {
  double sd = sample_sd(x);
  if (!(sd > 0.0)) throw ConfigError("bandwidth rule needs dispersed covariates");
  return factor * sd * std::pow(static_cast<double>(x.size()), -0.2);
}

}  // namespace addfit
