#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "addfit/backfit.hpp"
#include "addfit/csv_io.hpp"
#include "addfit/integrator.hpp"
#include "addfit/manifest.hpp"
#include "addfit/robust.hpp"
#include "addfit/simlab.hpp"
#include "addfit/smoother.hpp"
#include "addfit/version.hpp"

namespace fs = std::filesystem;
using namespace addfit;

namespace {

std::string now_iso8601() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << body;
}

struct SimulateArgs {
  long G = 3000;
  int J = 3;
  double gamma = 0.2;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  int reps = 50;
  std::string methods = "integration,backfit";
  std::string kernel = "epanechnikov";
  double h_factor = 1.0;
  double backfit_c = 0.4 * 1.06;
  int backfit_max_iter = 200;
  std::string out_dir = "addfit-out";
};

int cmd_simulate(const SimulateArgs& a) {
  SimConfig cfg;
  cfg.G = a.G;
  cfg.J = a.J;
  cfg.gamma = a.gamma;
  cfg.sigma_eps = a.sigma;
  cfg.seed = a.seed;
  cfg.reps = a.reps;
  cfg.kernel = kernel_family_from_name(a.kernel);
  cfg.integration_h_factor = a.h_factor;
  cfg.backfit_h_factor = a.backfit_c;
  cfg.backfit_max_iter = a.backfit_max_iter;
  cfg.validate();

  std::vector<Method> methods;
  std::stringstream ss(a.methods);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) methods.push_back(method_from_name(tok));
  }
  if (methods.empty()) throw ConfigError("no methods requested");

  MseReport report = run_comparison(cfg, methods);

  fs::create_directories(a.out_dir);
  RunManifest man;
  man.command = "simulate";
  man.tool_version = ADDFIT_VERSION;
  man.parameters = {{"G", a.G},       {"J", a.J},
                    {"gamma", a.gamma}, {"sigma", a.sigma},
                    {"seed", a.seed},   {"reps", a.reps},
                    {"methods", a.methods}, {"kernel", a.kernel},
                    {"h_factor", a.h_factor}, {"backfit_c", a.backfit_c},
                    {"backfit_max_iter", a.backfit_max_iter}};
  man.outputs = {"report.json", "report.txt"};
  man.timestamp = now_iso8601();

  bool too_many_failures = false;
  for (const auto& m : methods) {
    const MethodSummary& s = report.summaries.at(method_name(m));
    if (s.failures * 5 > cfg.reps) too_many_failures = true;  // > 20% of reps
  }
  man.degraded = too_many_failures;

  nlohmann::ordered_json rep_json = nlohmann::ordered_json::parse(report.to_json_string());
  rep_json["manifest_hash"] = man.hash();
  write_text((fs::path(a.out_dir) / "report.json").string(), rep_json.dump(2) + "\n");
  write_text((fs::path(a.out_dir) / "report.txt").string(),
             "# manifest " + man.hash() + "\n" + report.to_table());
  man.write((fs::path(a.out_dir) / "manifest.json").string());

  std::cout << report.to_table();
  return too_many_failures ? 2 : 0;
}

struct FitArgs {
  std::string data;
  std::string method = "integration";
  std::string kernel = "epanechnikov";
  double bandwidth = 0.0;  // 0 = rule of thumb
  double h_factor = 1.0;
  double backfit_c = 0.4 * 1.06;
  int backfit_max_iter = 200;
  int grid_points = 100;
  std::string out_dir = "addfit-fit";
};

int cmd_fit(const FitArgs& a) {
  PanelData panel = load_panel_csv(a.data);
  const int J = static_cast<int>(panel.replicates());
  Method method = method_from_name(a.method);
  KernelFamily family = kernel_family_from_name(a.kernel);

  GridPolicy policy;
  policy.points = a.grid_points;

  bool nonconverged = false;
  std::vector<ComponentEstimate> comps;
  if (method == Method::Integration || method == Method::Robust) {
    KernelSpec kernel{family, a.bandwidth > 0.0
                                  ? a.bandwidth
                                  : rule_of_thumb_bandwidth(panel.pooled_x(),
                                                            a.h_factor)};
    if (method == Method::Integration) {
      comps = estimate_all_components(panel, kernel, policy);
    } else {
      Eigen::VectorXd grid = make_grid(panel.pooled_x(), policy);
      for (int j = 0; j < J; ++j)
        comps.push_back(robust_component(panel, j, kernel, grid));
    }
  } else {
    std::vector<KernelSpec> ks;
    if (a.bandwidth > 0.0) {
      ks.assign(J, KernelSpec{family, a.bandwidth});
    } else {
      ks = backfit_bandwidths(panel, family, a.backfit_c);
    }
    for (int j = 0; j < J; ++j) {
      PooledBackfitResult r = pooled_backfit(panel, j, ks, -1.0, a.backfit_max_iter);
      if (!r.estimate.converged) nonconverged = true;
      comps.push_back(std::move(r.estimate));
    }
  }

  TreatmentEffects te = estimate_treatment_effects(panel, comps);

  // residuals of Y_gj - alpha_g - m_j(X_gj); dof-corrected sd estimates the
  // noise level sigma
  Eigen::MatrixXd resid(panel.units(), J);
  for (long g = 0; g < panel.units(); ++g)
    for (int j = 0; j < J; ++j)
      resid(g, j) = panel.y(g, j) - te.alpha[g] - comps[j].at(panel.x(g, j));
  double ssr = resid.squaredNorm();
  double residual_sd =
      std::sqrt(ssr / (static_cast<double>(panel.units()) * (J - 1)));

  fs::create_directories(a.out_dir);
  RunManifest man;
  man.command = "fit";
  man.tool_version = ADDFIT_VERSION;
  man.parameters = {{"data", a.data},
                    {"method", a.method},
                    {"kernel", a.kernel},
                    {"bandwidth", a.bandwidth},
                    {"h_factor", a.h_factor},
                    {"backfit_c", a.backfit_c},
                    {"grid_points", a.grid_points}};
  for (int j = 0; j < J; ++j)
    man.outputs.push_back("component_" + std::to_string(j + 1) + ".csv");
  man.outputs.push_back("alpha.csv");
  man.outputs.push_back("residuals.csv");
  man.outputs.push_back("summary.json");
  man.degraded = nonconverged;
  man.timestamp = now_iso8601();
  const std::string tag = "# manifest " + man.hash() + "\n";

  for (int j = 0; j < J; ++j) {
    std::ostringstream os;
    os << tag << "grid,m_hat,m_hat_prime\n";
    const ComponentEstimate& c = comps[j];
    for (long p = 0; p < c.grid.size(); ++p)
      os << format_full(c.grid[p]) << "," << format_full(c.values[p]) << ","
         << format_full(c.derivative[p]) << "\n";
    write_text(
        (fs::path(a.out_dir) / ("component_" + std::to_string(j + 1) + ".csv")).string(),
        os.str());
  }
  {
    std::ostringstream os;
    os << tag << "unit,alpha_hat\n";
    for (long g = 0; g < te.alpha.size(); ++g)
      os << (g + 1) << "," << format_full(te.alpha[g]) << "\n";
    write_text((fs::path(a.out_dir) / "alpha.csv").string(), os.str());
  }
  {
    std::ostringstream os;
    os << tag << "unit";
    for (int j = 0; j < J; ++j) os << ",r" << (j + 1);
    os << "\n";
    for (long g = 0; g < panel.units(); ++g) {
      os << (g + 1);
      for (int j = 0; j < J; ++j) os << "," << format_full(resid(g, j));
      os << "\n";
    }
    write_text((fs::path(a.out_dir) / "residuals.csv").string(), os.str());
  }
  {
    nlohmann::ordered_json s;
    s["method"] = a.method;
    s["units"] = panel.units();
    s["replicates"] = J;
    s["residual_sd"] = residual_sd;
    s["clamped_evaluations"] = te.clamped_evaluations;
    s["converged"] = !nonconverged;
    nlohmann::ordered_json cc = nlohmann::ordered_json::array();
    for (const auto& c : comps) {
      cc.push_back({{"component", c.component + 1},
                    {"grid_lo", c.grid[0]},
                    {"grid_hi", c.grid[c.grid.size() - 1]},
                    {"coverage", c.coverage},
                    {"centering_constant", c.centering_constant},
                    {"converged", c.converged}});
    }
    s["components"] = cc;
    s["manifest_hash"] = man.hash();
    write_text((fs::path(a.out_dir) / "summary.json").string(), s.dump(2) + "\n");
  }
  man.write((fs::path(a.out_dir) / "manifest.json").string());

  std::cout << "fit " << a.method << ": residual sd " << residual_sd
            << (nonconverged ? " (non-converged)" : "") << "\n";
  return nonconverged ? 2 : 0;
}

struct DiagnoseArgs {
  std::string data;
  std::string kernel = "epanechnikov";
  double bandwidth = 0.0;
  double backfit_c = 0.4 * 1.06;
  int subsample = 500;
  std::string out_dir;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  PanelData panel = load_panel_csv(a.data);
  const int J = static_cast<int>(panel.replicates());
  KernelFamily family = kernel_family_from_name(a.kernel);
  int m = static_cast<int>(std::min<long>(a.subsample, panel.units()));

  std::vector<KernelSpec> ks;
  if (a.bandwidth > 0.0)
    ks.assign(J, KernelSpec{family, a.bandwidth});
  else
    ks = backfit_bandwidths(panel, family, a.backfit_c);

  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (int j = 0; j < J; ++j) {
    for (int k = j + 1; k < J; ++k) {
      SmootherPlan pa{panel.x.col(j), ks[j], EvalMode::AtDesignPoints};
      SmootherPlan pb{panel.x.col(k), ks[k], EvalMode::AtDesignPoints};
      nlohmann::ordered_json entry = {{"pair", std::to_string(j + 1) + "," +
                                                   std::to_string(k + 1)}};
      try {
        double norm = backfit_norm_diagnostic(pa, pb, m);
        entry["norm"] = norm;
        entry["contractive"] = norm < 1.0;
        std::cout << "||S" << (j + 1) << "* S" << (k + 1) << "*|| = " << norm
                  << (norm < 1.0 ? "  (condition holds)" : "  (condition fails)")
                  << "\n";
      } catch (const SingularLocalDesign& e) {
        entry["norm"] = nullptr;
        entry["singular"] = true;
        std::cout << "||S" << (j + 1) << "* S" << (k + 1)
                  << "*||: singular local design (" << e.what() << ")\n";
      }
      pairs.push_back(entry);
    }
  }

  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    RunManifest man;
    man.command = "diagnose";
    man.tool_version = ADDFIT_VERSION;
    man.parameters = {{"data", a.data},
                      {"kernel", a.kernel},
                      {"bandwidth", a.bandwidth},
                      {"subsample", m}};
    man.outputs = {"diagnostics.json"};
    man.timestamp = now_iso8601();
    nlohmann::ordered_json out;
    out["subsample"] = m;
    out["pairs"] = pairs;
    out["manifest_hash"] = man.hash();
    write_text((fs::path(a.out_dir) / "diagnostics.json").string(), out.dump(2) + "\n");
    man.write((fs::path(a.out_dir) / "manifest.json").string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"additive-model component estimators for replicated panels"};
  app.set_version_flag("--version", std::string("addfit ") + ADDFIT_VERSION);
  app.require_subcommand(1);

  SimulateArgs sa;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Monte Carlo comparison of the estimators on synthetic panels");
  sim->add_option("--G", sa.G, "units per panel");
  sim->add_option("--J", sa.J, "replicates");
  sim->add_option("--gamma", sa.gamma, "correlation exponent, b_G = G^-gamma");
  sim->add_option("--sigma", sa.sigma, "noise standard deviation");
  sim->add_option("--seed", sa.seed, "RNG seed");
  sim->add_option("--reps", sa.reps, "Monte Carlo replications");
  sim->add_option("--methods", sa.methods,
                  "comma list of integration,backfit,robust");
  sim->add_option("--kernel", sa.kernel, "epanechnikov|quartic|triangular");
  sim->add_option("--h-factor", sa.h_factor, "integration bandwidth factor");
  sim->add_option("--backfit-c", sa.backfit_c, "backfitting bandwidth factor");
  sim->add_option("--backfit-max-iter", sa.backfit_max_iter, "backfitting sweep cap");
  sim->add_option("--out", sa.out_dir, "output directory");

  FitArgs fa;
  CLI::App* fit = app.add_subcommand("fit", "fit a panel CSV (header x1..xJ,y1..yJ)");
  fit->add_option("--data", fa.data, "input CSV path")->required();
  fit->add_option("--method", fa.method, "integration|backfit|robust");
  fit->add_option("--kernel", fa.kernel, "kernel family");
  fit->add_option("--bandwidth", fa.bandwidth, "fixed bandwidth (default: rule of thumb)");
  fit->add_option("--h-factor", fa.h_factor, "integration bandwidth factor");
  fit->add_option("--backfit-c", fa.backfit_c, "backfitting bandwidth factor");
  fit->add_option("--backfit-max-iter", fa.backfit_max_iter, "backfitting sweep cap");
  fit->add_option("--grid-points", fa.grid_points, "evaluation grid size");
  fit->add_option("--out", fa.out_dir, "output directory");

  DiagnoseArgs da;
  CLI::App* diag = app.add_subcommand(
      "diagnose", "backfitting existence condition ||Sj* Sk*|| on a panel CSV");
  diag->add_option("--data", da.data, "input CSV path")->required();
  diag->add_option("--kernel", da.kernel, "kernel family");
  diag->add_option("--bandwidth", da.bandwidth, "fixed bandwidth");
  diag->add_option("--backfit-c", da.backfit_c, "bandwidth factor");
  diag->add_option("--subsample", da.subsample, "diagnostic subsample size");
  diag->add_option("--out", da.out_dir, "optional output directory");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(sa);
    if (fit->parsed()) return cmd_fit(fa);
    if (diag->parsed()) return cmd_diagnose(da);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
