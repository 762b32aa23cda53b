// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "addfit/backfit.hpp"
#include "addfit/integrator.hpp"
#include "addfit/robust.hpp"
#include "addfit/simlab.hpp"
#include "addfit/smoother.hpp"
#include "test_util.hpp"

using namespace addfit;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double med(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Reference integration-method medians for the built-in design, indexed by gamma then target.
const std::map<double, std::map<std::string, double>> kReferenceIntegrationMedians = {
    {0.05, {{"m1", 0.1471}, {"m2", 0.0121}, {"m3", 0.0202}, {"alpha", 0.3542}}},
    {0.1, {{"m1", 0.0698}, {"m2", 0.0177}, {"m3", 0.0245}, {"alpha", 0.3565}}},
    {0.2, {{"m1", 0.1032}, {"m2", 0.0689}, {"m3", 0.0750}, {"alpha", 0.3647}}}};

SimConfig base_config(double gamma, std::uint64_t seed) {
  SimConfig cfg;
  cfg.G = 3000;
  cfg.J = 3;
  cfg.gamma = gamma;
  cfg.reps = 50;
  cfg.seed = seed;
  return cfg;
}

// ---- criteria 1 and 2: reference ordering and magnitudes --------------------

void criterion_1() {
  MseReport at02 = run_comparison(base_config(0.2, 101),
                                  {Method::Integration, Method::Backfit});
  const auto& integ = at02.summaries.at("integration").median_mse;
  const auto& backf = at02.summaries.at("backfit").median_mse;

  bool ordering = true;
  std::string detail = "gamma=0.2 integration vs backfitting medians:";
  for (const char* t : {"m1", "m2", "m3", "alpha"}) {
    double a = integ.at(t), b = backf.at(t);
    ordering = ordering && std::isfinite(a) && std::isfinite(b) && a < b;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " %s %.4f<%.4f", t, a, b);
    detail += buf;
  }
  report(1, ordering, "reference ordering —" + detail);
}

void criterion_2() {
  std::map<double, std::map<std::string, double>> got;
  got[0.2] = run_comparison(base_config(0.2, 101), {Method::Integration})
                 .summaries.at("integration")
                 .median_mse;
  got[0.05] = run_comparison(base_config(0.05, 102), {Method::Integration})
                  .summaries.at("integration")
                  .median_mse;
  got[0.1] = run_comparison(base_config(0.1, 103), {Method::Integration})
                 .summaries.at("integration")
                 .median_mse;

  bool within = true;
  std::string d2;
  for (const auto& [gamma, row] : kReferenceIntegrationMedians) {
    for (const auto& [target, entry] : row) {
      double v = got.at(gamma).at(target);
      double ratio = v / entry;
      if (!(ratio >= 1.0 / 3.0 && ratio <= 3.0)) {
        within = false;
        char buf[96];
        std::snprintf(buf, sizeof(buf), " [gamma=%g %s %.4f vs %.4f]", gamma,
                      target.c_str(), v, entry);
        d2 += buf;
      }
    }
  }
  report(2, within,
         "reference magnitudes — integration medians within 3x at every gamma" +
             (d2.empty() ? "" : "; out of band:" + d2));
}

// ---- criterion 3: correlation calibration ----------------------------------

void criterion_3() {
  const std::map<double, double> targets = {{0.05, 0.9919}, {0.1, 0.9962}, {0.2, 0.9992}};
  bool ok = true;
  std::string detail;
  for (const auto& [gamma, target] : targets) {
    SimConfig cfg = base_config(gamma, 104);
    double acc = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      SimulatedPanel sim = generate_panel(cfg, rep);
      Eigen::VectorXd a = sim.panel.x.col(0), b = sim.panel.x.col(1);
      double ma = a.mean(), mb = b.mean();
      acc += ((a.array() - ma) * (b.array() - mb)).mean() /
             std::sqrt((a.array() - ma).square().mean() *
                       (b.array() - mb).square().mean());
    }
    double corr = acc / 20.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " gamma=%g: %.4f (target %.4f)", gamma, corr,
                  target);
    detail += buf;
    if (std::abs(corr - target) > 0.003) ok = false;
  }
  report(3, ok, "correlation calibration —" + detail);
}

// ---- criterion 4: oracle equivalence suites --------------------------------

void criterion_4() {
  bool ok = true;
  std::string detail;

  {  // varcoef closed form vs dense 4x4 WLS at G = 40
    auto r = testutil::rng(601);
    const long n = 40;
    DiffPair pair;
    pair.x_partner = testutil::runif(r, n, 0.0, 2.0);
    pair.delta = testutil::runif(r, n, -0.4, 0.4);
    pair.y_diff = testutil::rnorm(r, n);
    KernelSpec k{KernelFamily::Epanechnikov, 0.8};
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(7, 0.4, 1.6);
    ThetaGrid t = fit_theta(pair, k, grid);
    double worst = 0.0;
    for (long p = 0; p < grid.size(); ++p) {
      Eigen::MatrixXd z(n, 4);
      Eigen::VectorXd w(n);
      for (long g = 0; g < n; ++g) {
        double u = pair.x_partner[g] - grid[p];
        z.row(g) << 1.0, u, pair.delta[g], pair.delta[g] * u;
        w[g] = evaluate_scaled(k, u);
      }
      Eigen::Vector4d oracle =
          (z.transpose() * w.asDiagonal() * z)
              .fullPivLu()
              .solve(z.transpose() * w.asDiagonal() * pair.y_diff);
      worst = std::max(worst,
                       (t.theta.row(p).transpose() - oracle).cwiseAbs().maxCoeff());
    }
    if (worst >= 1e-8) ok = false;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " varcoef %.1e", worst);
    detail += buf;
  }

  {  // backfit fixed points vs dense normal equations at G = 40
    auto r = testutil::rng(602);
    const long n = 40;
    Eigen::VectorXd x1 = testutil::runif(r, n, 0.0, 1.0);
    Eigen::VectorXd x2 = testutil::runif(r, n, 0.0, 1.0);
    KernelSpec k{KernelFamily::Epanechnikov, 0.45};
    DiffPair pair;
    pair.x_partner = x2;
    pair.delta = x1 - x2;
    pair.y_diff = testutil::rnorm(r, n);
    BackfitState st = backfit_pair(pair, k, k, 1e-11, 5000);
    Eigen::MatrixXd s1c =
        testutil::center_rows(testutil::dense_smoother_matrix(x1, k, x1));
    Eigen::MatrixXd s2c =
        testutil::center_rows(testutil::dense_smoother_matrix(x2, k, x2));
    double resid_pair = 0.0;
    if (st.converged) {
      resid_pair = std::max(
          (st.base_fit - s1c * st.partner_fit - s1c * pair.y_diff)
              .cwiseAbs()
              .maxCoeff(),
          (s2c * st.base_fit - st.partner_fit - s2c * pair.y_diff)
              .cwiseAbs()
              .maxCoeff());
    } else {
      ok = false;
    }
    if (resid_pair >= 1e-8) ok = false;

    // J-variate system residual on the block normal equations
    StarPanel star;
    star.x.resize(n, 3);
    star.y_star.resize(n, 3);
    star.x.col(0) = x1;
    star.x.col(1) = x2;
    star.x.col(2) = testutil::runif(r, n, 0.0, 1.0);
    Eigen::MatrixXd raw(n, 3);
    for (int j = 0; j < 3; ++j) raw.col(j) = testutil::rnorm(r, n);
    Eigen::VectorXd rowmean = raw.rowwise().mean();
    star.y_star = raw.colwise() - rowmean;
    std::vector<KernelSpec> ks(3, k);
    JvariateSystem sys = backfit_jvariate_system(star, 1, ks, 1e-11, 5000);
    double resid_star = 0.0;
    if (sys.converged) {
      std::vector<Eigen::MatrixXd> sc;
      for (int j = 0; j < 3; ++j)
        sc.push_back(testutil::center_rows(
            testutil::dense_smoother_matrix(star.x.col(j), k, star.x.col(j))));
      for (int kk = 0; kk < 3; ++kk) {
        Eigen::VectorXd others = Eigen::VectorXd::Zero(n);
        for (int l = 0; l < 3; ++l)
          if (l != kk) others += sys.star_fits[l];
        resid_star = std::max(
            resid_star, (sys.star_fits[kk] + sc[kk] * others -
                         sc[kk] * star.y_star.col(1))
                            .cwiseAbs()
                            .maxCoeff());
      }
    } else {
      ok = false;
    }
    if (resid_star >= 1e-8) ok = false;
    char buf[96];
    std::snprintf(buf, sizeof(buf), ", backfit %.1e / %.1e", resid_pair, resid_star);
    detail += buf;
  }

  {  // smoother vs dense S and S* at G = 40
    auto r = testutil::rng(603);
    const long n = 40;
    Eigen::VectorXd x = testutil::runif(r, n, 0.0, 2.0);
    Eigen::VectorXd y = testutil::rnorm(r, n);
    KernelSpec k{KernelFamily::Quartic, 0.5};
    SmootherPlan plan{x, k, EvalMode::AtDesignPoints};
    Eigen::MatrixXd s = testutil::dense_smoother_matrix(x, k, x);
    double e1 = (smooth(plan, y) - s * y).cwiseAbs().maxCoeff();
    double e2 =
        (centered_smooth(plan, y) - testutil::center_rows(s) * y).cwiseAbs().maxCoeff();
    if (e1 >= 1e-10 || e2 >= 1e-10) ok = false;
    char buf[64];
    std::snprintf(buf, sizeof(buf), ", smoother %.1e / %.1e", e1, e2);
    detail += buf;
  }

  report(4, ok, "oracle equivalence — max deviations:" + detail);
}

// ---- criterion 5: invariant suites ------------------------------------------

void criterion_5() {
  bool ok = true;
  std::string detail;

  {  // linear reproduction at 1e-10
    auto r = testutil::rng(604);
    Eigen::VectorXd x = testutil::runif(r, 80, -1.0, 2.0);
    SmootherPlan plan{x, KernelSpec{KernelFamily::Epanechnikov, 0.6},
                      EvalMode::AtDesignPoints};
    Eigen::VectorXd y = 0.7 * Eigen::VectorXd::Ones(80) + 1.9 * x;
    double err = (smooth(plan, y) - y).cwiseAbs().maxCoeff();
    if (err >= 1e-10) ok = false;
    detail += " linear-reproduction";
    detail += err < 1e-10 ? "(ok)" : "(FAIL)";
  }

  {  // zero mean of centered and integrated components at 1e-8 relative
    SimConfig cfg = base_config(0.2, 105);
    cfg.G = 600;
    SimulatedPanel sim = generate_panel(cfg);
    KernelSpec kernel{KernelFamily::Epanechnikov,
                      rule_of_thumb_bandwidth(sim.panel.pooled_x(), 1.0)};
    auto comps = estimate_all_components(sim.panel, kernel);
    bool centered = true;
    for (const auto& c : comps) {
      double acc = 0.0;
      for (long g = 0; g < cfg.G; ++g) acc += c.at(sim.panel.x(g, c.component));
      double range = c.values.maxCoeff() - c.values.minCoeff();
      if (std::abs(acc / cfg.G) >= 1e-8 * std::max(range, 1e-12)) centered = false;
    }
    auto r = testutil::rng(605);
    PanelData flat;
    flat.x.resize(200, 2);
    flat.y.resize(200, 2);
    flat.x.col(0) = testutil::runif(r, 200, 0.0, 1.0);
    flat.x.col(1) = testutil::runif(r, 200, 0.0, 1.0);
    flat.y.col(0) = flat.x.col(0).array().sin() + 0.2 * testutil::rnorm(r, 200).array();
    flat.y.col(1) = flat.x.col(1).array().cos() + 0.2 * testutil::rnorm(r, 200).array();
    std::vector<KernelSpec> ks(2, KernelSpec{KernelFamily::Epanechnikov, 0.3});
    PooledBackfitResult pb = pooled_backfit(flat, 0, ks, -1.0, 300);
    if (std::abs(pb.fit_at_design.mean()) >=
        1e-12 * pb.fit_at_design.cwiseAbs().maxCoeff() + 1e-300)
      centered = false;
    if (!centered) ok = false;
    detail += centered ? " zero-mean(ok)" : " zero-mean(FAIL)";
  }

  {  // nuisance invariance: bit-identical outputs under quantized unit shifts
    auto r = testutil::rng(606);
    const long n = 60;
    PanelData base;
    base.x.resize(n, 2);
    base.y.resize(n, 2);
    base.x.col(0) = testutil::quantize(testutil::runif(r, n, 0.0, 2.0));
    base.x.col(1) = testutil::quantize(testutil::runif(r, n, 0.0, 2.0));
    base.y.col(0) = testutil::quantize(testutil::rnorm(r, n));
    base.y.col(1) = testutil::quantize(testutil::rnorm(r, n));
    PanelData shifted = base;
    shifted.y.colwise() += testutil::quantize(testutil::rnorm(r, n, 6.0));

    KernelSpec k{KernelFamily::Epanechnikov, 0.5};
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(9, 0.3, 1.7);
    ThetaGrid ta = fit_theta(make_diff_pair(base, 0, 1), k, grid);
    ThetaGrid tb = fit_theta(make_diff_pair(shifted, 0, 1), k, grid);
    bool same = true;
    for (long p = 0; p < grid.size(); ++p)
      for (int c = 0; c < 4; ++c) {
        double a = ta.theta(p, c), b = tb.theta(p, c);
        if (!((std::isnan(a) && std::isnan(b)) || a == b)) same = false;
      }
    std::vector<KernelSpec> ks(2, k);
    PooledBackfitResult pa = pooled_backfit(base, 0, ks, 1e-8, 200);
    PooledBackfitResult pbb = pooled_backfit(shifted, 0, ks, 1e-8, 200);
    if (!(pa.fit_at_design.array() == pbb.fit_at_design.array()).all()) same = false;
    if (!same) ok = false;
    detail += same ? " nuisance-bit-identity(ok)" : " nuisance-bit-identity(FAIL)";
  }

  {  // determinism: byte-identical reports under a fixed seed
    SimConfig cfg = base_config(0.1, 107);
    cfg.G = 260;
    cfg.reps = 3;
    MseReport a = run_comparison(cfg, {Method::Integration, Method::Backfit});
    MseReport b = run_comparison(cfg, {Method::Integration, Method::Backfit});
    bool same = a.to_json_string() == b.to_json_string();
    if (!same) ok = false;
    detail += same ? " determinism(ok)" : " determinism(FAIL)";
  }

  report(5, ok, "invariant suites —" + detail);
}

// ---- criterion 6: empirical consistency -------------------------------------

void criterion_6() {
  auto sup_error = [&](long G, int rep) {
    SimConfig cfg;
    cfg.G = G;
    cfg.J = 3;
    cfg.gamma = 0.2;
    cfg.sigma_eps = 0.0;
    cfg.seed = 108;
    SimulatedPanel sim = generate_panel(cfg, rep);
    KernelSpec kernel{KernelFamily::Epanechnikov,
                      rule_of_thumb_bandwidth(sim.panel.pooled_x(), 1.0)};
    Eigen::VectorXd grid = make_grid(sim.panel.pooled_x(), GridPolicy{});
    std::vector<DerivativeCurve> curves;
    for (int k = 1; k < 3; ++k)
      curves.push_back(
          derivative_estimate(fit_theta(make_diff_pair(sim.panel, 0, k), kernel, grid)));
    ComponentEstimate est =
        integrate_component(average_derivative(curves), sim.panel.x.col(0));
    double worst = 0.0;
    for (long p = 0; p < est.grid.size(); ++p)
      worst = std::max(worst,
                       std::abs(est.values[p] - true_component(0, est.grid[p])));
    return worst;
  };
  std::map<long, double> medians;
  for (long G : {1000L, 2000L, 4000L}) {
    std::vector<double> errs;
    for (int rep = 0; rep < 20; ++rep) errs.push_back(sup_error(G, rep));
    medians[G] = med(errs);
  }
  bool ok = medians[1000] > medians[2000] && medians[2000] > medians[4000];
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "noiseless sup-grid error medians: G=1000 %.4f > G=2000 %.4f > "
                "G=4000 %.4f",
                medians[1000], medians[2000], medians[4000]);
  report(6, ok, std::string("consistency — ") + buf);
}

// ---- criterion 7: robustness under contamination ----------------------------

void criterion_7() {
  const int seeds = 50;
  int wins = 0;
  for (int s = 0; s < seeds; ++s) {
    SimConfig cfg;
    cfg.G = 500;
    cfg.J = 3;
    cfg.gamma = 0.2;
    cfg.seed = 109;
    SimulatedPanel sim = generate_panel(cfg, s);
    SubstreamRng contam(cfg.seed, s, StreamRole::Contam);
    for (long g = 0; g < cfg.G; ++g)
      for (int j = 0; j < cfg.J; ++j)
        if (contam.uniform() < 0.05) sim.panel.y(g, j) += 50.0;
    KernelSpec kernel{KernelFamily::Epanechnikov,
                      rule_of_thumb_bandwidth(sim.panel.pooled_x(), 1.0)};
    Eigen::VectorXd grid = make_grid(sim.panel.pooled_x(), GridPolicy{});
    auto truth = [](double x) { return true_component(0, x); };

    double mse_rob = mse_component(robust_component(sim.panel, 0, kernel, grid),
                                   truth, sim.panel.x.col(0));
    std::vector<DerivativeCurve> curves;
    for (int k = 1; k < 3; ++k)
      curves.push_back(
          derivative_estimate(fit_theta(make_diff_pair(sim.panel, 0, k), kernel, grid)));
    double mse_int = mse_component(
        integrate_component(average_derivative(curves), sim.panel.x.col(0)), truth,
        sim.panel.x.col(0));
    if (mse_rob < mse_int) ++wins;
  }
  bool ok = wins * 5 >= seeds * 4;  // >= 80%
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "robust beats integration under 5%% contamination in %d/%d seeds",
                wins, seeds);
  report(7, ok, buf);
}

}  // namespace

int main(int argc, char** argv) {
  int which = 0;  // 0 = all
  if (argc > 1) which = std::atoi(argv[1]);
  auto want = [&](int c) { return which == 0 || which == c; };
  if (want(1)) criterion_1();
  if (want(2)) criterion_2();
  if (want(3)) criterion_3();
  if (want(4)) criterion_4();
  if (want(5)) criterion_5();
  if (want(6)) criterion_6();
  if (want(7)) criterion_7();
  if (g_failures == 0)
    std::printf("all requested acceptance criteria passed\n");
  else
    std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
