#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "elliptw/harness.hpp"
#include "elliptw/locallaw.hpp"
#include "elliptw/rng.hpp"
#include "elliptw/tracy_widom.hpp"

namespace py = pybind11;
using namespace elliptw;

PYBIND11_MODULE(_core, m) {
    m.doc() = "limiting spectra and Tracy-Widom edge statistics of elliptical "
              "sample covariance matrices";

    py::class_<PopulationSpectrum>(m, "PopulationSpectrum")
        .def_static("identity", &PopulationSpectrum::identity, py::arg("p"))
        .def_static("two_atom", &PopulationSpectrum::two_atom, py::arg("p"), py::arg("sigma_a"),
                    py::arg("sigma_b"), py::arg("weight"))
        .def_static("from_file", &PopulationSpectrum::from_file, py::arg("p"), py::arg("path"))
        .def_readwrite("sigmas", &PopulationSpectrum::sigmas);

    py::class_<RadialLaw>(m, "RadialLaw")
        .def_static("parametric", &RadialLaw::parametric, py::arg("l"), py::arg("d"),
                    py::arg("b") = 1.0)
        .def_static("point_mass", &RadialLaw::point_mass, py::arg("value"))
        .def_static("empirical", &RadialLaw::empirical, py::arg("atoms"),
                    py::arg("weights") = std::vector<double>{})
        .def_readwrite("l", &RadialLaw::l)
        .def_readwrite("d", &RadialLaw::d)
        .def_readwrite("b", &RadialLaw::b)
        .def("mean", &RadialLaw::mean);

    m.def("radial_cdf", &radial_cdf, py::arg("law"), py::arg("x"));

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("p", &ModelConfig::p)
        .def_readwrite("n", &ModelConfig::n)
        .def_readwrite("spectrum", &ModelConfig::spectrum)
        .def_readwrite("radial", &ModelConfig::radial)
        .def_readwrite("tau", &ModelConfig::tau)
        .def("phi", &ModelConfig::phi);

    m.def("validate", &validate, py::arg("config"));

    py::enum_<SystemMode>(m, "SystemMode")
        .value("empirical", SystemMode::empirical)
        .value("limiting", SystemMode::limiting);

    py::enum_<Variant>(m, "Variant")
        .value("m", Variant::m)
        .value("m1", Variant::m1)
        .value("m2", Variant::m2);

    py::class_<StieltjesTriple>(m, "StieltjesTriple")
        .def_readonly("z", &StieltjesTriple::z)
        .def_readonly("m1", &StieltjesTriple::m1)
        .def_readonly("m2", &StieltjesTriple::m2)
        .def_readonly("m", &StieltjesTriple::m)
        .def_readonly("residual", &StieltjesTriple::residual)
        .def_readonly("iterations", &StieltjesTriple::iterations);

    py::class_<SolveOptions>(m, "SolveOptions")
        .def(py::init<>())
        .def_readwrite("tol", &SolveOptions::tol)
        .def_readwrite("max_iterations", &SolveOptions::max_iterations)
        .def_readwrite("omega", &SolveOptions::omega);

    m.def("solve_system",
          py::overload_cast<const ModelConfig&, const std::vector<double>&, Complex,
                            const SolveOptions&>(&solve_system),
          py::arg("config"), py::arg("xi_squared"), py::arg("z"), py::arg("opts") = SolveOptions{});
    m.def("solve_system",
          py::overload_cast<const ModelConfig&, Complex, const SolveOptions&>(&solve_system),
          py::arg("config"), py::arg("z"), py::arg("opts") = SolveOptions{});

    m.def("eval_Fp", &eval_Fp, py::arg("config"), py::arg("xi_squared"), py::arg("x"), py::arg("z"));
    m.def("eval_Fpc",
          py::overload_cast<const ModelConfig&, const RadialLaw&, double, double>(&eval_Fpc),
          py::arg("config"), py::arg("law"), py::arg("x"), py::arg("y"));

    py::class_<FpcPartials>(m, "FpcPartials")
        .def_readonly("dF_dx", &FpcPartials::dF_dx)
        .def_readonly("dF_dy", &FpcPartials::dF_dy)
        .def_readonly("d2F_dx2", &FpcPartials::d2F_dx2);
    m.def("partials_Fpc", &partials_Fpc, py::arg("config"), py::arg("law"), py::arg("x"),
          py::arg("y"));

    py::class_<DensityCurve>(m, "DensityCurve")
        .def_readonly("grid", &DensityCurve::grid)
        .def_readonly("values", &DensityCurve::values)
        .def_readonly("error_estimates", &DensityCurve::error_estimates)
        .def("trapezoid_mass", &DensityCurve::trapezoid_mass)
        .def("write_csv", &DensityCurve::write_csv, py::arg("path"));

    m.def(
        "density",
        [](const ModelConfig& config, SystemMode mode, Variant variant,
           const std::vector<double>& grid, double eta_scale,
           const std::optional<std::vector<double>>& xi_squared) {
            return density(config, mode, variant, grid, eta_scale,
                           xi_squared ? &*xi_squared : nullptr);
        },
        py::arg("config"), py::arg("mode"), py::arg("variant"), py::arg("grid"),
        py::arg("eta_scale") = 1.0, py::arg("xi_squared") = std::nullopt);
    m.def("support_grid", &support_grid, py::arg("upper"), py::arg("n_points"),
          py::arg("lower") = 0.0);

    py::class_<RegularityReport>(m, "RegularityReport")
        .def_readonly("sigma1_gap", &RegularityReport::sigma1_gap)
        .def_readonly("tau_threshold", &RegularityReport::tau_threshold)
        .def_readonly("d", &RegularityReport::d)
        .def_readonly("vartheta", &RegularityReport::vartheta)
        .def_readonly("passed", &RegularityReport::pass)
        .def_property_readonly("condition_case", [](const RegularityReport& r) {
            return std::string(RegularityReport::case_name(r.condition_case));
        });

    py::class_<EdgeReport>(m, "EdgeReport")
        .def_readonly("x_star", &EdgeReport::x_star)
        .def_readonly("edge", &EdgeReport::edge)
        .def_readonly("gamma0", &EdgeReport::gamma0)
        .def_readonly("sqrt_fit_exponent", &EdgeReport::sqrt_fit_exponent)
        .def_readonly("n_critical_points", &EdgeReport::n_critical_points)
        .def_readonly("multiple_roots", &EdgeReport::multiple_roots)
        .def_readonly("regularity", &EdgeReport::regularity)
        .def("to_json", &EdgeReport::to_json);

    m.def(
        "find_edge",
        [](const ModelConfig& config, SystemMode mode,
           const std::optional<std::vector<double>>& xi_squared) {
            return find_edge(config, mode, xi_squared ? &*xi_squared : nullptr);
        },
        py::arg("config"), py::arg("mode") = SystemMode::limiting,
        py::arg("xi_squared") = std::nullopt);
    m.def("gamma0_scale", &gamma0_scale, py::arg("config"), py::arg("law"), py::arg("report"),
          py::arg("quadrature_nodes") = 256);
    m.def("check_regularity", &check_regularity, py::arg("config"), py::arg("law"),
          py::arg("report"));
    m.def(
        "sqrt_edge_fit",
        [](const ModelConfig& config, SystemMode mode,
           const std::optional<std::vector<double>>& xi_squared, Variant variant) {
            auto fit = sqrt_edge_fit(config, mode, xi_squared ? &*xi_squared : nullptr, variant);
            return py::make_tuple(fit.density_slope, fit.m_increment_slope);
        },
        py::arg("config"), py::arg("mode") = SystemMode::limiting,
        py::arg("xi_squared") = std::nullopt, py::arg("variant") = Variant::m);

    py::class_<TW1Table>(m, "TW1Table")
        .def_readonly("s_grid", &TW1Table::s_grid)
        .def_readonly("q_values", &TW1Table::q_values)
        .def_readonly("F1_values", &TW1Table::F1_values)
        .def("mean", &TW1Table::mean)
        .def("variance", &TW1Table::variance)
        .def("write_csv", &TW1Table::write_csv, py::arg("path"))
        .def_static("read_csv", &TW1Table::read_csv, py::arg("path"));

    m.def(
        "build_tw1_table",
        [](double s_min, double s_max, double step) {
            TWBuildOptions opts;
            opts.s_min = s_min;
            opts.s_max = s_max;
            opts.step = step;
            return build_table(opts);
        },
        py::arg("s_min") = -10.0, py::arg("s_max") = 6.0, py::arg("step") = 1e-3);
    m.def("tw1_cdf", &tw1_cdf, py::arg("table"), py::arg("s"));
    m.def("tw1_quantile", &tw1_quantile, py::arg("table"), py::arg("u"));
    m.def("ks_distance", &ks_distance, py::arg("samples"), py::arg("table"));
    m.def("ks_two_sample", &ks_two_sample, py::arg("a"), py::arg("b"));

    py::class_<TrialRecord>(m, "TrialRecord")
        .def_readonly("seed", &TrialRecord::seed)
        .def_readonly("top_eigs_Q", &TrialRecord::top_eigs_Q)
        .def_readonly("top_eigs_QG", &TrialRecord::top_eigs_QG)
        .def_readonly("lambda_plus", &TrialRecord::lambda_plus)
        .def_readonly("rescaled_stat", &TrialRecord::rescaled_stat)
        .def_readonly("rescaled_stat_gaussian", &TrialRecord::rescaled_stat_gaussian)
        .def_readonly("omega_pass", &TrialRecord::omega_pass)
        .def_readonly("edge_failed", &TrialRecord::edge_failed);

    m.def(
        "run_trial",
        [](const ModelConfig& config, double gamma0, std::uint64_t seed_base,
           std::uint64_t trial_index, bool elliptical, bool gaussian, int k_top) {
            TrialOptions opts;
            opts.elliptical = elliptical;
            opts.gaussian = gaussian;
            opts.k_top = k_top;
            return run_trial(config, gamma0, seed_base, trial_index, opts);
        },
        py::arg("config"), py::arg("gamma0"), py::arg("seed_base"), py::arg("trial_index"),
        py::arg("elliptical") = true, py::arg("gaussian") = false, py::arg("k_top") = 3);

    py::class_<ExperimentSpec>(m, "ExperimentSpec")
        .def(py::init<>())
        .def_readwrite("model", &ExperimentSpec::model)
        .def_readwrite("trials", &ExperimentSpec::trials)
        .def_readwrite("k_top", &ExperimentSpec::k_top)
        .def_readwrite("seed_base", &ExperimentSpec::seed_base)
        .def_readwrite("elliptical", &ExperimentSpec::elliptical)
        .def_readwrite("gaussian", &ExperimentSpec::gaussian)
        .def_readwrite("outputs", &ExperimentSpec::outputs)
        .def_readwrite("threads", &ExperimentSpec::threads)
        .def_readwrite("force", &ExperimentSpec::force)
        .def_readwrite("omega_per_trial", &ExperimentSpec::omega_per_trial);

    py::class_<CampaignSummary>(m, "CampaignSummary")
        .def_readonly("n_trials", &CampaignSummary::n_trials)
        .def_readonly("n_excluded", &CampaignSummary::n_excluded)
        .def_readonly("ks_elliptical", &CampaignSummary::ks_elliptical)
        .def_readonly("ks_gaussian", &CampaignSummary::ks_gaussian)
        .def_readonly("ks_two_sample", &CampaignSummary::ks_two_sample)
        .def_readonly("mean_stat", &CampaignSummary::mean_stat)
        .def_readonly("var_stat", &CampaignSummary::var_stat)
        .def_readonly("gamma0", &CampaignSummary::gamma0)
        .def_readonly("lambda_plus_limiting", &CampaignSummary::lambda_plus_limiting)
        .def_readonly("omega_pass_rate", &CampaignSummary::omega_pass_rate)
        .def_readonly("flagged", &CampaignSummary::flagged)
        .def("to_json", &CampaignSummary::to_json);

    m.def(
        "run_campaign", [](const ExperimentSpec& spec) { return run_campaign(spec); },
        py::arg("spec"));

    m.def("parse_config_file", [](const std::string& path) {
        ParsedConfig cfg = parse_config_file(path);
        return py::make_tuple(cfg.model, cfg.spec);
    });

    py::register_exception<SolverFailure>(m, "SolverFailure");
    py::register_exception<PoleError>(m, "PoleError");
    py::register_exception<EdgeNotFound>(m, "EdgeNotFound");
    py::register_exception<CampaignRefused>(m, "CampaignRefused");
}
