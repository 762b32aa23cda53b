#include "addfit/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "addfit/errors.hpp"

namespace addfit {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Run {
  long begin = 0, end = 0;  // [begin, end)
  long covered = 0;
};
}  // namespace

ComponentEstimate integrate_component(const DerivativeCurve& derivative,
                                      const Eigen::VectorXd& observed_x,
                                      double min_coverage) {
  const long m = derivative.grid.size();
  if (derivative.values.size() != m)
    throw LengthMismatch("derivative curve grid/value size mismatch");
  if (observed_x.size() == 0) throw ConfigError("no observed covariates");

  // largest contiguous valid run, measured by observed mass inside its span
  std::vector<Run> runs;
  long i = 0;
  while (i < m) {
    if (!std::isfinite(derivative.values[i])) {
      ++i;
      continue;
    }
    Run r;
    r.begin = i;
    while (i < m && std::isfinite(derivative.values[i])) ++i;
    r.end = i;
    if (r.end - r.begin >= 2) {
      double lo = derivative.grid[r.begin];
      double hi = derivative.grid[r.end - 1];
      for (long g = 0; g < observed_x.size(); ++g)
        if (observed_x[g] >= lo && observed_x[g] <= hi) ++r.covered;
      runs.push_back(r);
    }
  }
  if (runs.empty())
    throw InsufficientCoverage("derivative curve has no usable valid range", 0.0);
  const Run best = *std::max_element(
      runs.begin(), runs.end(), [](const Run& a, const Run& b) {
        if (a.covered != b.covered) return a.covered < b.covered;
        return (a.end - a.begin) < (b.end - b.begin);
      });
  const double coverage =
      static_cast<double>(best.covered) / static_cast<double>(observed_x.size());
  if (coverage < min_coverage)
    throw InsufficientCoverage(
        "derivative valid range covers only " + std::to_string(coverage * 100.0) +
            "% of the observed covariate mass",
        coverage);

  const long len = best.end - best.begin;
  ComponentEstimate est;
  est.grid = derivative.grid.segment(best.begin, len);
  est.derivative = derivative.values.segment(best.begin, len);
  est.coverage = coverage;
  est.clamped_points = observed_x.size() - best.covered;

  // cumulative trapezoid primitive from the left endpoint
  Eigen::VectorXd prim(len);
  prim[0] = 0.0;
  for (long p = 1; p < len; ++p) {
    double dx = est.grid[p] - est.grid[p - 1];
    prim[p] = prim[p - 1] + 0.5 * (est.derivative[p - 1] + est.derivative[p]) * dx;
  }

  double acc = 0.0;
  for (long g = 0; g < observed_x.size(); ++g)
    acc += interp_clamped(est.grid, prim, observed_x[g]);
  est.centering_constant = acc / static_cast<double>(observed_x.size());
  est.values = prim.array() - est.centering_constant;
  return est;
}

std::vector<ComponentEstimate> estimate_all_components(const PanelData& panel,
                                                       const KernelSpec& kernel,
                                                       const GridPolicy& policy) {
  panel.validate();
  kernel.validate();
  const int J = static_cast<int>(panel.replicates());
  const Eigen::VectorXd grid = make_grid(panel.pooled_x(), policy);

  std::vector<ComponentEstimate> out;
  out.reserve(J);
  for (int j = 0; j < J; ++j) {
    try {
      std::vector<DerivativeCurve> curves;
      curves.reserve(J - 1);
      for (int k = 0; k < J; ++k) {
        if (k == j) continue;
        DiffPair pair = make_diff_pair(panel, j, k);
        curves.push_back(derivative_estimate(fit_theta(pair, kernel, grid)));
      }
      ComponentEstimate est = integrate_component(average_derivative(curves),
                                                  panel.x.col(j));
      est.component = j;
      out.push_back(std::move(est));
    } catch (const InsufficientCoverage& e) {
      throw InsufficientCoverage(
          "component " + std::to_string(j + 1) + ": " + e.what(), e.coverage());
    }
  }
  return out;
}

TreatmentEffects estimate_treatment_effects(
    const PanelData& panel, const std::vector<ComponentEstimate>& components) {
  panel.validate();
  const long G = panel.units();
  const int J = static_cast<int>(panel.replicates());
  if (static_cast<int>(components.size()) != J)
    throw LengthMismatch("need one component estimate per replicate");

  // honor the component labels when present, else take positional order
  std::vector<const ComponentEstimate*> byrep(J, nullptr);
  for (const auto& c : components) {
    if (c.component >= 0 && c.component < J && byrep[c.component] == nullptr)
      byrep[c.component] = &c;
  }
  for (int j = 0; j < J; ++j)
    if (byrep[j] == nullptr) byrep[j] = &components[j];

  TreatmentEffects te;
  te.alpha.resize(G);
  for (long g = 0; g < G; ++g) {
    double acc = 0.0;
    for (int j = 0; j < J; ++j) {
      const ComponentEstimate& c = *byrep[j];
      double x = panel.x(g, j);
      if (x < c.grid[0] || x > c.grid[c.grid.size() - 1]) ++te.clamped_evaluations;
      acc += panel.y(g, j) - c.at(x);
    }
    te.alpha[g] = acc / J;
  }
  return te;
}

}  // namespace addfit
