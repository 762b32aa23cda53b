#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "addfit/backfit.hpp"
#include "addfit/csv_io.hpp"
#include "addfit/integrator.hpp"
#include "addfit/robust.hpp"
#include "addfit/simlab.hpp"
#include "addfit/smoother.hpp"
#include "addfit/version.hpp"

namespace py = pybind11;
using namespace addfit;

PYBIND11_MODULE(_addfit, m) {
  m.doc() = "Additive-model component estimators for replicated panels with "
            "correlated covariates: integration estimation, pooled backfitting "
            "and a pooled robust alternative, plus the simulation laboratory.";
  m.attr("__version__") = ADDFIT_VERSION;

  py::register_exception<SingularLocalDesign>(m, "SingularLocalDesignError");
  py::register_exception<BadReplicateIndex>(m, "BadReplicateIndexError");
  py::register_exception<GridMismatch>(m, "GridMismatchError");
  py::register_exception<LengthMismatch>(m, "LengthMismatchError");
  py::register_exception<InsufficientCoverage>(m, "InsufficientCoverageError");
  py::register_exception<NonIdentifiable>(m, "NonIdentifiableError");
  py::register_exception<ConfigError>(m, "ConfigurationError");
  py::register_exception<CsvError>(m, "CsvFormatError");

  py::enum_<KernelFamily>(m, "KernelFamily")
      .value("Epanechnikov", KernelFamily::Epanechnikov)
      .value("Quartic", KernelFamily::Quartic)
      .value("Triangular", KernelFamily::Triangular);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init([](KernelFamily family, double bandwidth) {
             KernelSpec s{family, bandwidth};
             s.validate();
             return s;
           }),
           py::arg("family") = KernelFamily::Epanechnikov,
           py::arg("bandwidth") = 1.0)
      .def_readwrite("family", &KernelSpec::family)
      .def_readwrite("bandwidth", &KernelSpec::bandwidth);

  py::class_<KernelMoments>(m, "KernelMoments")
      .def_property_readonly("mu",
                             [](const KernelMoments& k) {
                               return std::vector<double>(k.mu.begin(), k.mu.end());
                             })
      .def_property_readonly("nu", [](const KernelMoments& k) {
        return std::vector<double>(k.nu.begin(), k.nu.end());
      });

  m.def("evaluate", &evaluate, py::arg("spec"), py::arg("t"),
        "Kernel value K(t); zero outside [-1, 1].");
  m.def("moments", &moments, py::arg("spec"));

  py::class_<PanelData>(m, "PanelData")
      .def(py::init([](Eigen::MatrixXd x, Eigen::MatrixXd y) {
             PanelData p{std::move(x), std::move(y)};
             p.validate();
             return p;
           }),
           py::arg("x"), py::arg("y"))
      .def_readonly("x", &PanelData::x)
      .def_readonly("y", &PanelData::y)
      .def_property_readonly("G", &PanelData::units)
      .def_property_readonly("J", &PanelData::replicates);

  py::enum_<EvalMode>(m, "EvalMode")
      .value("AtDesignPoints", EvalMode::AtDesignPoints)
      .value("AtGrid", EvalMode::AtGrid);

  py::class_<SmootherPlan>(m, "SmootherPlan")
      .def(py::init([](Eigen::VectorXd design, KernelSpec kernel, EvalMode mode) {
             return SmootherPlan{std::move(design), kernel, mode};
           }),
           py::arg("design_points"), py::arg("kernel"),
           py::arg("mode") = EvalMode::AtDesignPoints)
      .def_readonly("design_points", &SmootherPlan::design_points)
      .def_readonly("kernel", &SmootherPlan::kernel);

  m.def("equivalent_kernel_row", &equivalent_kernel_row, py::arg("plan"), py::arg("x"));
  m.def("smooth", &smooth, py::arg("plan"), py::arg("y"));
  m.def("centered_smooth", &centered_smooth, py::arg("plan"), py::arg("y"));
  m.def("backfit_norm_diagnostic", &backfit_norm_diagnostic, py::arg("plan_a"),
        py::arg("plan_b"), py::arg("subsample"));

  py::class_<DiffPair>(m, "DiffPair")
      .def_readonly("base_index", &DiffPair::base_index)
      .def_readonly("partner_index", &DiffPair::partner_index)
      .def_readonly("y_diff", &DiffPair::y_diff)
      .def_readonly("x_partner", &DiffPair::x_partner)
      .def_readonly("delta", &DiffPair::delta);

  m.def("make_diff_pair", &make_diff_pair, py::arg("panel"), py::arg("j"), py::arg("k"));

  py::class_<ThetaGrid>(m, "ThetaGrid")
      .def_readonly("grid", &ThetaGrid::grid)
      .def_readonly("theta", &ThetaGrid::theta)
      .def_readonly("window_counts", &ThetaGrid::window_counts)
      .def_property_readonly("valid", [](const ThetaGrid& t) {
        std::vector<bool> v(t.valid.begin(), t.valid.end());
        return v;
      });

  m.def("fit_theta", &fit_theta, py::arg("pair"), py::arg("kernel"), py::arg("grid"));

  py::class_<DerivativeCurve>(m, "DerivativeCurve")
      .def(py::init([](Eigen::VectorXd grid, Eigen::VectorXd values) {
             return DerivativeCurve{std::move(grid), std::move(values)};
           }),
           py::arg("grid"), py::arg("values"))
      .def_readonly("grid", &DerivativeCurve::grid)
      .def_readonly("values", &DerivativeCurve::values);

  m.def("derivative_estimate", &derivative_estimate, py::arg("theta"));
  m.def("average_derivative", &average_derivative, py::arg("curves"));

  py::class_<GridPolicy>(m, "GridPolicy")
      .def(py::init([](int points, double lo, double hi) {
             return GridPolicy{points, lo, hi};
           }),
           py::arg("points") = 100, py::arg("lower_quantile") = 0.02,
           py::arg("upper_quantile") = 0.98)
      .def_readwrite("points", &GridPolicy::points)
      .def_readwrite("lower_quantile", &GridPolicy::lower_quantile)
      .def_readwrite("upper_quantile", &GridPolicy::upper_quantile);

  m.def("make_grid", &make_grid, py::arg("pooled"), py::arg("policy") = GridPolicy{});
  m.def("rule_of_thumb_bandwidth", &rule_of_thumb_bandwidth, py::arg("x"),
        py::arg("factor"));

  py::class_<ComponentEstimate>(m, "ComponentEstimate")
      .def_readonly("component", &ComponentEstimate::component)
      .def_readonly("grid", &ComponentEstimate::grid)
      .def_readonly("values", &ComponentEstimate::values)
      .def_readonly("derivative", &ComponentEstimate::derivative)
      .def_readonly("centering_constant", &ComponentEstimate::centering_constant)
      .def_readonly("clamped_points", &ComponentEstimate::clamped_points)
      .def_readonly("coverage", &ComponentEstimate::coverage)
      .def_readonly("converged", &ComponentEstimate::converged)
      .def("__call__", &ComponentEstimate::at, py::arg("x"),
           "Interpolated value, clamped outside the grid span.");

  m.def("integrate_component", &integrate_component, py::arg("derivative"),
        py::arg("observed_x"), py::arg("min_coverage") = 0.9);
  m.def("estimate_all_components", &estimate_all_components, py::arg("panel"),
        py::arg("kernel"), py::arg("policy") = GridPolicy{});

  py::class_<TreatmentEffects>(m, "TreatmentEffects")
      .def_readonly("alpha", &TreatmentEffects::alpha)
      .def_readonly("clamped_evaluations", &TreatmentEffects::clamped_evaluations);

  m.def("estimate_treatment_effects", &estimate_treatment_effects, py::arg("panel"),
        py::arg("components"));

  py::class_<BackfitState>(m, "BackfitState")
      .def_readonly("base_fit", &BackfitState::base_fit)
      .def_readonly("partner_fit", &BackfitState::partner_fit)
      .def_readonly("iterations", &BackfitState::iterations)
      .def_readonly("sup_change", &BackfitState::sup_change)
      .def_readonly("converged", &BackfitState::converged)
      .def_readonly("change_history", &BackfitState::change_history);

  m.def("backfit_pair", &backfit_pair, py::arg("pair"), py::arg("kernel_base"),
        py::arg("kernel_partner"), py::arg("tol") = -1.0, py::arg("max_iter") = 200);

  py::class_<PooledBackfitResult>(m, "PooledBackfitResult")
      .def_readonly("estimate", &PooledBackfitResult::estimate)
      .def_readonly("fit_at_design", &PooledBackfitResult::fit_at_design)
      .def_readonly("partners", &PooledBackfitResult::partners)
      .def_property_readonly("pair_converged", [](const PooledBackfitResult& r) {
        std::vector<bool> v(r.pair_converged.begin(), r.pair_converged.end());
        return v;
      });

  m.def("pooled_backfit", &pooled_backfit, py::arg("panel"), py::arg("base"),
        py::arg("kernels"), py::arg("tol") = -1.0, py::arg("max_iter") = 200);
  m.def("backfit_bandwidths", &backfit_bandwidths, py::arg("panel"), py::arg("family"),
        py::arg("c") = 0.4 * 1.06);

  py::class_<StarPanel>(m, "StarPanel")
      .def_readonly("y_star", &StarPanel::y_star)
      .def_readonly("x", &StarPanel::x);

  m.def("make_star_panel", &make_star_panel, py::arg("panel"));
  m.def("backfit_jvariate", &backfit_jvariate, py::arg("star"), py::arg("kernels"),
        py::arg("tol") = -1.0, py::arg("max_iter") = 200);

  py::class_<RobustFitPoint>(m, "RobustFitPoint")
      .def_readonly("x", &RobustFitPoint::x)
      .def_readonly("alpha", &RobustFitPoint::alpha)
      .def_readonly("beta0", &RobustFitPoint::beta0)
      .def_readonly("irls_iterations", &RobustFitPoint::irls_iterations)
      .def_readonly("converged", &RobustFitPoint::converged)
      .def_readonly("objective_history", &RobustFitPoint::objective_history);

  py::class_<RobustOptions>(m, "RobustOptions")
      .def(py::init<>())
      .def_readwrite("delta_factor", &RobustOptions::delta_factor)
      .def_readwrite("max_iter", &RobustOptions::max_iter)
      .def_readwrite("param_tol", &RobustOptions::param_tol);

  m.def("robust_fit_point", &robust_fit_point, py::arg("pairs"), py::arg("kernel"),
        py::arg("x"), py::arg("opts") = RobustOptions{});
  m.def(
      "robust_component",
      [](const PanelData& panel, int base, const KernelSpec& kernel,
         const GridPolicy& policy, const RobustOptions& opts) {
        return robust_component(panel, base, kernel, policy, opts);
      },
      py::arg("panel"), py::arg("base"), py::arg("kernel"),
      py::arg("policy") = GridPolicy{}, py::arg("opts") = RobustOptions{});

  py::enum_<Method>(m, "Method")
      .value("Integration", Method::Integration)
      .value("Backfit", Method::Backfit)
      .value("Robust", Method::Robust);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("G", &SimConfig::G)
      .def_readwrite("J", &SimConfig::J)
      .def_readwrite("gamma", &SimConfig::gamma)
      .def_readwrite("sigma_eps", &SimConfig::sigma_eps)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("reps", &SimConfig::reps)
      .def_readwrite("integration_h_factor", &SimConfig::integration_h_factor)
      .def_readwrite("backfit_h_factor", &SimConfig::backfit_h_factor)
      .def_readwrite("kernel", &SimConfig::kernel)
      .def_readwrite("grid", &SimConfig::grid)
      .def_readwrite("backfit_max_iter", &SimConfig::backfit_max_iter)
      .def_property_readonly("b_G", &SimConfig::b_G)
      .def("validate", &SimConfig::validate);

  py::class_<PanelTruth>(m, "PanelTruth")
      .def_readonly("alpha", &PanelTruth::alpha)
      .def_readonly("u", &PanelTruth::u)
      .def_readonly("m_true", &PanelTruth::m_true);

  py::class_<SimulatedPanel>(m, "SimulatedPanel")
      .def_readonly("panel", &SimulatedPanel::panel)
      .def_readonly("truth", &SimulatedPanel::truth);

  m.def("true_component", &true_component, py::arg("j"), py::arg("x"));
  m.def("generate_panel", &generate_panel, py::arg("config"), py::arg("rep") = 0);
  m.def("mse_component", &mse_component, py::arg("estimate"), py::arg("truth"),
        py::arg("observed_x"));
  m.def("mse_alpha", &mse_alpha, py::arg("alpha_hat"), py::arg("alpha_true"));

  py::class_<MseReport>(m, "MseReport")
      .def("to_json", &MseReport::to_json_string)
      .def("to_table", &MseReport::to_table)
      .def("median_mse",
           [](const MseReport& r, const std::string& method, const std::string& target) {
             return r.summaries.at(method).median_mse.at(target);
           },
           py::arg("method"), py::arg("target"))
      .def("failures",
           [](const MseReport& r, const std::string& method) {
             return r.summaries.at(method).failures;
           })
      .def("nonconverged", [](const MseReport& r, const std::string& method) {
        return r.summaries.at(method).nonconverged;
      });

  m.def("run_comparison", &run_comparison, py::arg("config"), py::arg("methods"),
        py::call_guard<py::gil_scoped_release>());

  m.def("load_panel_csv", &load_panel_csv, py::arg("path"));
  m.def("write_panel_csv", &write_panel_csv, py::arg("path"), py::arg("panel"));
}
