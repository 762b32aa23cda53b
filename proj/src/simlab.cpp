#include "addfit/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "addfit/backfit.hpp"
#include "addfit/csv_io.hpp"
#include "addfit/robust.hpp"
#include "addfit/rng.hpp"

namespace addfit {

Method method_from_name(const std::string& name) {
  if (name == "integration") return Method::Integration;
  if (name == "backfit" || name == "backfitting") return Method::Backfit;
  if (name == "robust") return Method::Robust;
  throw ConfigError("unknown method: " + name);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Integration: return "integration";
    case Method::Backfit: return "backfit";
    case Method::Robust: return "robust";
  }
  return "?";
}

void SimConfig::validate() const {
  if (G < 10) throw ConfigError("G must be at least 10");
  if (J < 2) throw ConfigError("J must be at least 2");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be nonnegative");
  if (!(sigma_eps >= 0.0)) throw ConfigError("sigma must be nonnegative");
  if (reps < 1) throw ConfigError("reps must be at least 1");
  if (!(integration_h_factor > 0.0) || !(backfit_h_factor > 0.0))
    throw ConfigError("bandwidth factors must be positive");
  if (backfit_max_iter < 1) throw ConfigError("backfit max_iter must be positive");
}

double true_component(int j, double x) {
  switch (((j % 3) + 3) % 3) {
    case 0: return std::sqrt(5.0) * (std::sin(x) - 0.2854);
    case 1: {
      double c = x - 11.0;
      return 0.01 * c * c * c - 0.2913;
    }
    default: return 0.2 * std::exp(x / 5.0) - 3.0648;
  }
}

SimulatedPanel generate_panel(const SimConfig& cfg, int rep) {
  cfg.validate();
  const long G = cfg.G;
  const int J = cfg.J;
  const double b = cfg.b_G();

  SubstreamRng rx(cfg.seed, rep, StreamRole::X);
  SubstreamRng ru(cfg.seed, rep, StreamRole::U);
  SubstreamRng ra(cfg.seed, rep, StreamRole::Alpha);
  SubstreamRng re(cfg.seed, rep, StreamRole::Eps);

  SimulatedPanel out;
  out.panel.x.resize(G, J);
  out.panel.y.resize(G, J);
  out.truth.alpha.resize(G);
  out.truth.u.resize(G, J - 1);
  out.truth.m_true.resize(G, J);

  for (long g = 0; g < G; ++g) {
    // mixture: w.p. 0.6 the cubic density 0.0004 (x-6)^3 on (6,16) sampled
    // by inverse CDF, w.p. 0.4 uniform on [6,16]
    double sel = rx.uniform();
    double v = rx.uniform();
    double x1 = (sel < 0.6) ? 6.0 + 10.0 * std::pow(v, 0.25) : 6.0 + 10.0 * v;
    out.panel.x(g, 0) = x1;
    for (int k = 1; k < J; ++k) {
      double u = ru.normal();
      out.truth.u(g, k - 1) = u;
      out.panel.x(g, k) = x1 - b * u;
    }
    out.truth.alpha[g] = ra.laplace();
    for (int j = 0; j < J; ++j) {
      double m = true_component(j, out.panel.x(g, j));
      out.truth.m_true(g, j) = m;
      out.panel.y(g, j) = out.truth.alpha[g] + m + cfg.sigma_eps * re.normal();
    }
  }
  return out;
}

double mse_component(const ComponentEstimate& estimate,
                     const std::function<double(double)>& truth,
                     const Eigen::VectorXd& observed_x) {
  if (observed_x.size() == 0) throw ConfigError("no observed covariates");
  double acc = 0.0;
  for (long g = 0; g < observed_x.size(); ++g) {
    double e = estimate.at(observed_x[g]) - truth(observed_x[g]);
    acc += e * e;
  }
  return acc / static_cast<double>(observed_x.size());
}

double mse_alpha(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& alpha_true) {
  if (alpha_hat.size() != alpha_true.size())
    throw LengthMismatch("treatment effect vectors differ in length");
  if (alpha_hat.size() == 0) throw LengthMismatch("empty treatment effect vectors");
  return (alpha_hat - alpha_true).squaredNorm() /
         static_cast<double>(alpha_hat.size());
}

namespace {

struct RepOutcome {
  bool failed = false;
  bool nonconverged = false;
  std::string message;
  std::map<std::string, double> mse;
};

RepOutcome run_one(const SimConfig& cfg, Method method, const SimulatedPanel& sim) {
  const int J = cfg.J;
  RepOutcome rc;
  try {
    std::vector<ComponentEstimate> comps;
    if (method == Method::Integration || method == Method::Robust) {
      KernelSpec kernel{cfg.kernel,
                        rule_of_thumb_bandwidth(sim.panel.pooled_x(),
                                                cfg.integration_h_factor)};
      if (method == Method::Integration) {
        comps = estimate_all_components(sim.panel, kernel, cfg.grid);
      } else {
        Eigen::VectorXd grid = make_grid(sim.panel.pooled_x(), cfg.grid);
        for (int j = 0; j < J; ++j)
          comps.push_back(robust_component(sim.panel, j, kernel, grid));
      }
    } else {
      std::vector<KernelSpec> ks =
          backfit_bandwidths(sim.panel, cfg.kernel, cfg.backfit_h_factor);
      for (int j = 0; j < J; ++j) {
        PooledBackfitResult r =
            pooled_backfit(sim.panel, j, ks, -1.0, cfg.backfit_max_iter);
        if (!r.estimate.converged) rc.nonconverged = true;
        comps.push_back(std::move(r.estimate));
      }
    }
    for (int j = 0; j < J; ++j) {
      rc.mse["m" + std::to_string(j + 1)] = mse_component(
          comps[j], [j](double x) { return true_component(j, x); },
          sim.panel.x.col(j));
    }
    TreatmentEffects te = estimate_treatment_effects(sim.panel, comps);
    rc.mse["alpha"] = mse_alpha(te.alpha, sim.truth.alpha);
  } catch (const std::exception& e) {
    rc.failed = true;
    rc.message = e.what();
  }
  return rc;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int worker_count(int reps) {
  unsigned hw = std::thread::hardware_concurrency();
  long cap = hw > 0 ? hw : 1;
  if (const char* env = std::getenv("ADDFIT_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) cap = v;
  }
  return static_cast<int>(std::min<long>(cap, reps));
}

}  // namespace

MseReport run_comparison(const SimConfig& cfg, const std::vector<Method>& methods) {
  cfg.validate();
  if (methods.empty()) throw ConfigError("no methods requested");

  MseReport report;
  report.config = cfg;
  report.methods = methods;

  // one outcome slot per (rep, method): filled concurrently, reduced after
  std::vector<std::vector<RepOutcome>> outcomes(
      cfg.reps, std::vector<RepOutcome>(methods.size()));

  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      int rep = next.fetch_add(1);
      if (rep >= cfg.reps) return;
      SimulatedPanel sim = generate_panel(cfg, rep);
      for (size_t mi = 0; mi < methods.size(); ++mi)
        outcomes[rep][mi] = run_one(cfg, methods[mi], sim);
    }
  };
  int workers = worker_count(cfg.reps);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::vector<std::string> targets;
  for (int j = 0; j < cfg.J; ++j) targets.push_back("m" + std::to_string(j + 1));
  targets.push_back("alpha");

  for (size_t mi = 0; mi < methods.size(); ++mi) {
    MethodSummary sum;
    std::map<std::string, std::vector<double>> per_target;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const RepOutcome& rc = outcomes[rep][mi];
      if (rc.failed) {
        ++sum.failures;
        if (sum.failure_messages.size() < 5) sum.failure_messages.push_back(rc.message);
        continue;
      }
      if (rc.nonconverged) ++sum.nonconverged;
      ++sum.used_reps;
      for (const auto& [key, val] : rc.mse) per_target[key].push_back(val);
    }
    for (const auto& t : targets) sum.median_mse[t] = median(per_target[t]);
    report.summaries[method_name(methods[mi])] = std::move(sum);
  }
  return report;
}

std::string MseReport::to_json_string() const {
  nlohmann::ordered_json j;
  j["config"] = {
      {"G", config.G},
      {"J", config.J},
      {"gamma", config.gamma},
      {"b_G", config.b_G()},
      {"sigma", config.sigma_eps},
      {"seed", config.seed},
      {"reps", config.reps},
      {"kernel", kernel_family_name(config.kernel)},
      {"integration_h_factor", config.integration_h_factor},
      {"backfit_h_factor", config.backfit_h_factor},
      {"grid_points", config.grid.points},
  };
  nlohmann::ordered_json ms;
  for (const auto& m : methods) {
    const MethodSummary& s = summaries.at(method_name(m));
    nlohmann::ordered_json entry;
    nlohmann::ordered_json med;
    for (const auto& [key, val] : s.median_mse) {
      if (std::isnan(val))
        med[key] = nullptr;
      else
        med[key] = val;
    }
    entry["median_mse"] = med;
    entry["used_reps"] = s.used_reps;
    entry["failures"] = s.failures;
    entry["nonconverged_reps"] = s.nonconverged;
    if (!s.failure_messages.empty()) entry["failure_samples"] = s.failure_messages;
    ms[method_name(m)] = entry;
  }
  j["methods"] = ms;
  return j.dump(2);
}

std::string MseReport::to_table() const {
  std::vector<std::string> targets;
  for (int jj = 0; jj < config.J; ++jj) targets.push_back("m" + std::to_string(jj + 1));
  targets.push_back("alpha");

  std::ostringstream os;
  os << "Medians of MSEs (G=" << config.G << ", J=" << config.J
     << ", gamma=" << config.gamma << ", reps=" << config.reps << ")\n";
  os << "         ";
  for (const auto& m : methods) {
    os.width(16);
    os << method_name(m);
  }
  os << "\n";
  for (const auto& t : targets) {
    os.width(9);
    os << std::left << t << std::right;
    for (const auto& m : methods) {
      double v = summaries.at(method_name(m)).median_mse.at(t);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", v);
      os.width(16);
      os << buf;
    }
    os << "\n";
  }
  for (const auto& m : methods) {
    const MethodSummary& s = summaries.at(method_name(m));
    if (s.failures > 0 || s.nonconverged > 0) {
      os << method_name(m) << ": " << s.failures << " failed reps, "
         << s.nonconverged << " non-converged reps (of " << config.reps << ")\n";
    }
  }
  return os.str();
}

}  // namespace addfit
