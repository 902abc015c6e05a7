// Python bindings. Center sets cross the boundary as plain (M, d) numpy
// arrays; everything else maps one to one onto the C++ types.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mixem/em.hpp"
#include "mixem/experiments.hpp"
#include "mixem/sampling.hpp"
#include "mixem/theory.hpp"
#include "mixem/types.hpp"
#include "mixem/verify.hpp"
#include "mixem/weights.hpp"

namespace py = pybind11;
using namespace mixem;

namespace {

std::vector<Eigen::MatrixXd> iterate_matrices(const Trajectory& traj) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(traj.iterates.size());
    for (const auto& it : traj.iterates) out.push_back(it.centers);
    return out;
}

}  // namespace

PYBIND11_MODULE(_mixem, m) {
    m.doc() = "EM for isotropic Gaussian location mixtures";

    py::register_exception<WeightCollapseError>(m, "WeightCollapseError", PyExc_RuntimeError);

    py::enum_<Matching>(m, "Matching")
        .value("identity", Matching::identity)
        .value("best_permutation", Matching::best_permutation);

    py::enum_<StopReason>(m, "StopReason")
        .value("max_iters", StopReason::max_iters)
        .value("rel_change_below_tol", StopReason::rel_change_below_tol)
        .value("weight_collapse", StopReason::weight_collapse);

    py::enum_<ModelKind>(m, "ModelKind")
        .value("simplex_plus_origin", ModelKind::simplex_plus_origin)
        .value("explicit_centers", ModelKind::explicit_centers);

    py::enum_<WeightsKind>(m, "WeightsKind")
        .value("uniform", WeightsKind::uniform)
        .value("linear", WeightsKind::linear)
        .value("explicit_weights", WeightsKind::explicit_weights);

    py::enum_<DeviationKind>(m, "DeviationKind")
        .value("weight_sum", DeviationKind::weight_sum)
        .value("weighted_vector", DeviationKind::weighted_vector);

    py::class_<MixtureModel>(m, "MixtureModel")
        .def(py::init<Eigen::MatrixXd, Eigen::VectorXd>(), py::arg("centers"),
             py::arg("weights"))
        .def_property_readonly("centers", &MixtureModel::centers)
        .def_property_readonly("weights", &MixtureModel::weights)
        .def_property_readonly("components", &MixtureModel::components)
        .def_property_readonly("dim", &MixtureModel::dim)
        .def("digest", &MixtureModel::digest);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init([](Eigen::MatrixXd points) {
                 Dataset d;
                 d.points = std::move(points);
                 return d;
             }),
             py::arg("points"))
        .def_readonly("points", &Dataset::points)
        .def_readonly("seed", &Dataset::seed)
        .def_readonly("source_model_digest", &Dataset::source_model_digest)
        .def_property_readonly("labels", [](const Dataset& d) { return d.labels(); })
        .def_property_readonly("size", &Dataset::size)
        .def_property_readonly("dim", &Dataset::dim);

    py::class_<EmConfig>(m, "EmConfig")
        .def(py::init<>())
        .def_readwrite("max_iters", &EmConfig::max_iters)
        .def_readwrite("rel_tol", &EmConfig::rel_tol)
        .def_readwrite("population_mc_samples", &EmConfig::population_mc_samples)
        .def_readwrite("matching", &EmConfig::matching)
        .def_readwrite("threads", &EmConfig::threads);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("iterates", &iterate_matrices)
        .def_readonly("stat_errors", &Trajectory::stat_errors)
        .def_readonly("opt_errors", &Trajectory::opt_errors)
        .def_readonly("stop_reason", &Trajectory::stop_reason)
        .def_property_readonly("iterations", &Trajectory::iterations);

    py::class_<SeparationStats>(m, "SeparationStats")
        .def_readonly("r_min", &SeparationStats::r_min)
        .def_readonly("r_max", &SeparationStats::r_max)
        .def_readonly("kappa", &SeparationStats::kappa)
        .def_readonly("effective_dim_2m", &SeparationStats::effective_dim_2m)
        .def_readonly("effective_dim_m", &SeparationStats::effective_dim_m)
        .def_readonly("m", &SeparationStats::m)
        .def_readonly("d", &SeparationStats::d)
        .def_readonly("degenerate", &SeparationStats::degenerate);

    py::class_<TheoryConstants>(m, "TheoryConstants")
        .def(py::init<>())
        .def_readwrite("c0", &TheoryConstants::c0)
        .def_readwrite("c1", &TheoryConstants::c1)
        .def_readwrite("c2", &TheoryConstants::c2)
        .def_readwrite("c3", &TheoryConstants::c3);

    py::class_<SampleSizeCheck>(m, "SampleSizeCheck")
        .def_readonly("ok", &SampleSizeCheck::ok)
        .def_readonly("threshold", &SampleSizeCheck::threshold)
        .def_readonly("log_n_over_n", &SampleSizeCheck::log_n_over_n)
        .def_readonly("c2_tilde", &SampleSizeCheck::c2_tilde)
        .def_readonly("c2_tilde_alt", &SampleSizeCheck::c2_tilde_alt)
        .def_readonly("c3_tilde", &SampleSizeCheck::c3_tilde);

    py::class_<TheoryReport>(m, "TheoryReport")
        .def_readonly("stats", &TheoryReport::stats)
        .def_readonly("constants", &TheoryReport::constants)
        .def_readonly("n", &TheoryReport::n)
        .def_readonly("init_error", &TheoryReport::init_error)
        .def_readonly("radius_a", &TheoryReport::radius_a)
        .def_readonly("zeta", &TheoryReport::zeta)
        .def_readonly("thm1_separation_ok", &TheoryReport::thm1_separation_ok)
        .def_readonly("thm2_radius", &TheoryReport::thm2_radius)
        .def_readonly("thm2_radius_proof_dim", &TheoryReport::thm2_radius_proof_dim)
        .def_readonly("thm2_dims_differ", &TheoryReport::thm2_dims_differ)
        .def_readonly("thm2_separation_ok", &TheoryReport::thm2_separation_ok)
        .def_readonly("sample", &TheoryReport::sample)
        .def_readonly("plateau", &TheoryReport::plateau)
        .def_readonly("v_bound_radius", &TheoryReport::v_bound_radius)
        .def_readonly("weight_mass_radius", &TheoryReport::weight_mass_radius)
        .def_readonly("weight_mass_separation_ok", &TheoryReport::weight_mass_separation_ok)
        .def_readonly("degenerate", &TheoryReport::degenerate);

    py::class_<LemmaCheckResult>(m, "LemmaCheckResult")
        .def_readonly("estimate", &LemmaCheckResult::estimate)
        .def_readonly("bound", &LemmaCheckResult::bound)
        .def_readonly("mc_std_error", &LemmaCheckResult::mc_std_error)
        .def_readonly("n_samples", &LemmaCheckResult::n_samples)
        .def_readonly("holds", &LemmaCheckResult::holds);

    py::class_<DeviationResult>(m, "DeviationResult")
        .def_readonly("max_deviation", &DeviationResult::max_deviation)
        .def_readonly("rate_reference", &DeviationResult::rate_reference);

    py::class_<ExperimentSpec>(m, "ExperimentSpec")
        .def(py::init<>())
        .def_readwrite("model_kind", &ExperimentSpec::model_kind)
        .def_readwrite("m", &ExperimentSpec::m)
        .def_readwrite("d", &ExperimentSpec::d)
        .def_readwrite("r_min_scale", &ExperimentSpec::r_min_scale)
        .def_readwrite("weights_kind", &ExperimentSpec::weights_kind)
        .def_readwrite("explicit_centers", &ExperimentSpec::explicit_centers)
        .def_readwrite("explicit_weights", &ExperimentSpec::explicit_weights)
        .def_readwrite("n", &ExperimentSpec::n)
        .def_readwrite("trials", &ExperimentSpec::trials)
        .def_readwrite("init_radius_fraction", &ExperimentSpec::init_radius_fraction)
        .def_readwrite("em", &ExperimentSpec::em)
        .def_readwrite("master_seed", &ExperimentSpec::master_seed)
        .def_readwrite("constants", &ExperimentSpec::constants)
        .def("validate", &ExperimentSpec::validate);

    py::class_<TrialResult>(m, "TrialResult")
        .def_readonly("trial_index", &TrialResult::trial_index)
        .def_readonly("seed", &TrialResult::seed)
        .def_readonly("trajectory", &TrialResult::trajectory)
        .def_readonly("plateau_estimate", &TrialResult::plateau_estimate)
        .def_readonly("iterations_to_plateau", &TrialResult::iterations_to_plateau);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("r_min", &SweepRow::r_min)
        .def_readonly("iteration", &SweepRow::iteration)
        .def_readonly("mean_stat_error", &SweepRow::mean_stat_error)
        .def_readonly("mean_log_stat_error", &SweepRow::mean_log_stat_error);

    // --- densities and posteriors ---------------------------------------
    m.def("log_density", &log_density, py::arg("x"), py::arg("model"));
    m.def(
        "posterior_weights",
        [](const Eigen::VectorXd& x, const Eigen::MatrixXd& centers,
           const Eigen::VectorXd& weights) {
            return posterior_weights(x, CenterSet{centers}, weights);
        },
        py::arg("x"), py::arg("centers"), py::arg("weights"));
    m.def(
        "grad_weight",
        [](const Eigen::VectorXd& x, const Eigen::MatrixXd& centers,
           const Eigen::VectorXd& weights, int component) {
            return grad_weight(x, CenterSet{centers}, weights, component);
        },
        py::arg("x"), py::arg("centers"), py::arg("weights"), py::arg("component"));
    m.def(
        "responsibilities",
        [](const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
           const Eigen::VectorXd& weights) {
            return responsibilities(points, CenterSet{centers}, weights);
        },
        py::arg("points"), py::arg("centers"), py::arg("weights"));

    // --- sampling ---------------------------------------------------------
    m.def("sample_dataset", &sample_dataset, py::arg("model"), py::arg("n"), py::arg("seed"));

    // --- EM -----------------------------------------------------------------
    m.def(
        "em_step",
        [](const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
           const Eigen::VectorXd& weights, int threads) {
            return em_step_points(points, CenterSet{centers}, weights, threads).centers;
        },
        py::arg("points"), py::arg("centers"), py::arg("weights"), py::arg("threads") = 1);
    m.def(
        "em_step_population",
        [](const MixtureModel& model, const Eigen::MatrixXd& centers, std::int64_t mc_samples,
           std::uint64_t seed, int threads) {
            return em_step_population(model, CenterSet{centers}, mc_samples, seed, threads)
                .centers;
        },
        py::arg("model"), py::arg("centers"), py::arg("mc_samples"), py::arg("seed"),
        py::arg("threads") = 1);
    m.def(
        "statistical_error",
        [](const Eigen::MatrixXd& centers, const MixtureModel& truth, Matching matching) {
            return statistical_error(CenterSet{centers}, truth, matching);
        },
        py::arg("centers"), py::arg("truth"), py::arg("matching") = Matching::identity);
    m.def(
        "run_em",
        [](const Dataset& data, const Eigen::MatrixXd& init, const EmConfig& config,
           const MixtureModel& truth, bool record_opt_errors) {
            return run_em(data, CenterSet{init}, config, truth, record_opt_errors);
        },
        py::arg("data"), py::arg("init"), py::arg("config"), py::arg("truth"),
        py::arg("record_opt_errors") = false);
    m.def(
        "run_em_population",
        [](const MixtureModel& model, const Eigen::MatrixXd& init, const EmConfig& config,
           std::uint64_t seed) {
            return run_em_population(model, CenterSet{init}, config, seed);
        },
        py::arg("model"), py::arg("init"), py::arg("config"), py::arg("seed"));

    // --- closed-form conditions -------------------------------------------
    m.def("separation_stats", &separation_stats, py::arg("model"));
    m.def("contraction_radius", &contraction_radius, py::arg("stats"));
    m.def("contraction_coefficient", &contraction_coefficient, py::arg("stats"), py::arg("a"));
    m.def("separation_ok", &separation_ok, py::arg("stats"));
    m.def("constant_radius", &constant_radius, py::arg("stats"), py::arg("constants"));
    m.def("constant_radius_proof_dim", &constant_radius_proof_dim, py::arg("stats"),
          py::arg("constants"));
    m.def("sample_size_check", &sample_size_check, py::arg("stats"), py::arg("init_error"),
          py::arg("n"), py::arg("constants"));
    m.def("error_envelope", &error_envelope, py::arg("t"), py::arg("init_error"),
          py::arg("stats"), py::arg("n"), py::arg("constants"));
    m.def("plateau_term", &plateau_term, py::arg("stats"), py::arg("n"), py::arg("constants"));
    m.def("gaussian_tail_bound", &gaussian_tail_bound, py::arg("r"), py::arg("d"));
    m.def("v_bound_radius", &v_bound_radius, py::arg("stats"));
    m.def("v_bound", &v_bound, py::arg("stats"), py::arg("a"));
    m.def("weight_mass_radius", &weight_mass_radius, py::arg("stats"));
    m.def("weight_mass_separation_ok", &weight_mass_separation_ok, py::arg("stats"));
    m.def(
        "theory_report",
        [](const MixtureModel& model, double init_error, std::int64_t n,
           const TheoryConstants& constants) {
            return theory_report(model, init_error, n, constants);
        },
        py::arg("model"), py::arg("init_error"), py::arg("n"),
        py::arg("constants") = TheoryConstants{});
    m.def("report_to_json", &report_to_json, py::arg("report"));
    m.def("report_from_json", &report_from_json, py::arg("text"));

    // --- Monte Carlo checks -------------------------------------------------
    m.def(
        "estimate_weight_mass",
        [](const MixtureModel& model, const Eigen::MatrixXd& iterate, int component,
           std::int64_t mc_samples, std::uint64_t seed) {
            return estimate_weight_mass(model, CenterSet{iterate}, component, mc_samples, seed);
        },
        py::arg("model"), py::arg("iterate"), py::arg("component"), py::arg("mc_samples"),
        py::arg("seed"));
    m.def(
        "estimate_v",
        [](const MixtureModel& model, const Eigen::MatrixXd& start, const Eigen::MatrixXd& end,
           int component, int t_grid, std::int64_t mc_samples, std::uint64_t seed) {
            return estimate_v(model, CenterSet{start}, CenterSet{end}, component, t_grid,
                              mc_samples, seed);
        },
        py::arg("model"), py::arg("start"), py::arg("end"), py::arg("component"),
        py::arg("t_grid"), py::arg("mc_samples"), py::arg("seed"));
    m.def("fixed_point_residual", &fixed_point_residual, py::arg("model"),
          py::arg("mc_samples"), py::arg("seed"));
    m.def("empirical_deviation", &empirical_deviation, py::arg("model"), py::arg("n"),
          py::arg("probe_count"), py::arg("radius"), py::arg("kind"), py::arg("seed"),
          py::arg("population_samples") = 1000000);
    m.def("operator_norm", &operator_norm, py::arg("a"));
    m.def("weight_mass_probe_radius", &weight_mass_probe_radius, py::arg("model"));

    // --- experiment batches ---------------------------------------------------
    m.def("build_model", &build_model, py::arg("spec"));
    m.def(
        "perturbed_init",
        [](const MixtureModel& model, double fraction, std::uint64_t seed) {
            return perturbed_init(model, fraction, seed).centers;
        },
        py::arg("model"), py::arg("fraction"), py::arg("seed"));
    m.def("run_trials", &run_trials, py::arg("spec"),
          py::call_guard<py::gil_scoped_release>());
    m.def("snr_sweep", &snr_sweep, py::arg("base"), py::arg("r_values"),
          py::call_guard<py::gil_scoped_release>());
    m.def("plateau_estimate", &plateau_estimate, py::arg("stat_errors"));
    m.def("iterations_to_plateau", &iterations_to_plateau, py::arg("stat_errors"));
    m.def("spec_to_json", &spec_to_json, py::arg("spec"));
    m.def("spec_from_json", &spec_from_json, py::arg("text"));
    m.def("trials_to_csv", &trials_to_csv, py::arg("spec"), py::arg("model"),
          py::arg("results"));
    m.def("sweep_to_csv", &sweep_to_csv, py::arg("rows"));
    m.def("summary_to_json", &summary_to_json, py::arg("spec"), py::arg("model"),
          py::arg("results"));
    m.def("dataset_to_json", &dataset_to_json, py::arg("model"), py::arg("data"));
    m.def("dataset_from_json", &dataset_from_json, py::arg("text"));
}
