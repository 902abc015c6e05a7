// Command-line front end: dataset simulation, EM runs, theory reports,
// Monte Carlo lemma checks, and the figure-reproduction batches.
//
// Exit codes: 0 success, 2 validation/input error, 3 weight collapse.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixem/em.hpp"
#include "mixem/experiments.hpp"
#include "mixem/rng.hpp"
#include "mixem/sampling.hpp"
#include "mixem/theory.hpp"
#include "mixem/types.hpp"
#include "mixem/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path write_file(const std::string& out_dir, const std::string& name,
                    const std::string& content) {
    fs::path dir{out_dir};
    fs::create_directories(dir);
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot write file: " + path.string());
    out << content;
    out.close();
    if (!out) throw std::runtime_error("short write: " + path.string());
    std::cout << "wrote " << path.string() << "\n";
    return path;
}

struct GlobalOptions {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

mixem::ExperimentSpec load_spec(const GlobalOptions& opts) {
    mixem::ExperimentSpec spec;
    if (!opts.config.empty()) spec = mixem::spec_from_json(read_file(opts.config));
    if (opts.seed) spec.master_seed = *opts.seed;
    if (opts.threads) spec.em.threads = std::max(1, *opts.threads);
    spec.validate();
    return spec;
}

int cmd_simulate(const GlobalOptions& opts) {
    const mixem::ExperimentSpec spec = load_spec(opts);
    const mixem::MixtureModel model = mixem::build_model(spec);
    const mixem::Dataset data = mixem::sample_dataset(model, spec.n, spec.master_seed);
    write_file(opts.out, "dataset.json", mixem::dataset_to_json(model, data));
    std::cout << "dataset: n=" << data.size() << " d=" << data.dim()
              << " seed=" << data.seed << " model_digest=" << data.source_model_digest
              << "\n";
    return 0;
}

int cmd_em_run(const GlobalOptions& opts, const std::string& data_path,
               const std::string& init_path) {
    const mixem::ExperimentSpec spec = load_spec(opts);
    auto [model, data] = mixem::dataset_from_json(read_file(data_path));

    mixem::CenterSet init;
    if (init_path.empty()) {
        init = mixem::perturbed_init(model, spec.init_radius_fraction, spec.master_seed);
    } else {
        init = mixem::centers_from_json(read_file(init_path));
        if (init.components() != model.components() || init.dim() != model.dim()) {
            throw std::invalid_argument("init centers shape does not match the dataset model");
        }
    }

    const mixem::Trajectory traj = mixem::run_em(data, init, spec.em, model, true);

    mixem::TrialResult row;
    row.trial_index = 0;
    row.seed = spec.master_seed;
    row.trajectory = traj;
    row.plateau_estimate = mixem::plateau_estimate(traj.stat_errors);
    row.iterations_to_plateau = mixem::iterations_to_plateau(traj.stat_errors);

    write_file(opts.out, "trajectory.csv", mixem::trials_to_csv(spec, model, {row}));

    json summary;
    summary["stop_reason"] = mixem::to_string(traj.stop_reason);
    summary["iterations"] = traj.iterations();
    summary["final_stat_error"] = traj.stat_errors.back();
    if (traj.opt_errors) summary["final_opt_error"] = traj.opt_errors->back();
    summary["plateau_estimate"] = row.plateau_estimate;
    summary["iterations_to_plateau"] = row.iterations_to_plateau;
    write_file(opts.out, "em_run.json", summary.dump(2) + "\n");

    std::cout << "em: " << traj.iterations() << " iterations, stop="
              << mixem::to_string(traj.stop_reason)
              << ", final stat error=" << traj.stat_errors.back() << "\n";
    return traj.stop_reason == mixem::StopReason::weight_collapse ? 3 : 0;
}

int cmd_theory_report(const GlobalOptions& opts) {
    const mixem::ExperimentSpec spec = load_spec(opts);
    const mixem::MixtureModel model = mixem::build_model(spec);
    const mixem::SeparationStats stats = mixem::separation_stats(model);
    const double init_error = spec.init_radius_fraction * stats.r_min;
    const mixem::TheoryReport report =
        mixem::theory_report(stats, init_error, spec.n, spec.constants);
    const std::string text = mixem::report_to_json(report);
    write_file(opts.out, "theory_report.json", text);
    std::cout << text;
    return 0;
}

int cmd_verify_lemmas(const GlobalOptions& opts, std::int64_t mc_samples, int probes,
                      int t_grid) {
    if (mc_samples < 2) throw std::invalid_argument("--mc-samples must be at least 2");
    if (probes < 1) throw std::invalid_argument("--probes must be positive");
    if (t_grid < 2) throw std::invalid_argument("--t-grid must be at least 2");

    const mixem::ExperimentSpec spec = load_spec(opts);
    const mixem::MixtureModel model = mixem::build_model(spec);
    const mixem::SeparationStats stats = mixem::separation_stats(model);
    const std::uint64_t seed = spec.master_seed;
    const int m = model.components();
    const int d = model.dim();

    json doc;
    doc["model"] = {{"M", m},
                    {"d", d},
                    {"r_min", stats.r_min},
                    {"r_max", stats.r_max},
                    {"kappa", stats.kappa}};

    bool all_hold = true;

    // Posterior-mass lower bound at random iterates around the truth.
    {
        const double admissible = mixem::weight_mass_radius(stats);
        const double radius = mixem::weight_mass_probe_radius(model);
        json block;
        block["admissible_radius"] = admissible;
        block["probe_radius"] = radius;
        block["checks"] = json::array();
        for (int p = 0; p < probes; ++p) {
            auto gen = mixem::rng::stream(seed, mixem::rng::Purpose::init, 1000 + p);
            Eigen::MatrixXd centers = model.centers();
            for (int i = 0; i < m; ++i) {
                centers.row(i) += mixem::sample_ball(d, radius, gen).transpose();
            }
            const mixem::CenterSet iterate{centers};
            const std::uint64_t check_seed =
                mixem::rng::derive(seed, mixem::rng::Purpose::probe, p);
            for (int i = 0; i < m; ++i) {
                const mixem::LemmaCheckResult r =
                    mixem::estimate_weight_mass(model, iterate, i, mc_samples, check_seed);
                block["checks"].push_back({{"probe", p},
                                           {"component", i},
                                           {"estimate", r.estimate},
                                           {"bound", r.bound},
                                           {"mc_std_error", r.mc_std_error},
                                           {"n_samples", r.n_samples},
                                           {"holds", r.holds}});
                all_hold = all_hold && r.holds;
            }
        }
        doc["weight_mass"] = block;
    }

    // Interaction-matrix suprema along segments from the truth, against the
    // closed-form ceiling at the probe radius.
    {
        const double admissible = mixem::v_bound_radius(stats);
        const double radius = admissible > 0.0 ? admissible : 0.25 * stats.r_min;
        const double bound = mixem::v_bound(stats, radius);
        auto gen = mixem::rng::stream(seed, mixem::rng::Purpose::init, 5000);
        Eigen::MatrixXd centers = model.centers();
        for (int i = 0; i < m; ++i) {
            centers.row(i) += mixem::sample_ball(d, radius, gen).transpose();
        }
        const mixem::CenterSet endpoint{centers};
        json block;
        block["admissible_radius"] = admissible;
        block["probe_radius"] = radius;
        block["bound"] = bound;
        block["checks"] = json::array();
        for (int i = 0; i < m; ++i) {
            const double est = mixem::estimate_v(
                model, model.center_set(), endpoint, i, t_grid, mc_samples,
                mixem::rng::derive(seed, mixem::rng::Purpose::probe, 10000 + i));
            const bool holds = est <= bound;
            block["checks"].push_back({{"component", i}, {"estimate", est}, {"holds", holds}});
            all_hold = all_hold && holds;
        }
        doc["v_condition"] = block;
    }

    // The truth should be (numerically) a fixed point of the idealized update.
    {
        const double residual = mixem::fixed_point_residual(
            model, mc_samples, mixem::rng::derive(seed, mixem::rng::Purpose::probe, 20000));
        const double reference =
            5.0 * std::sqrt(static_cast<double>(d) / static_cast<double>(mc_samples));
        const bool holds = residual <= reference;
        doc["fixed_point"] = {{"residual", residual},
                              {"reference", reference},
                              {"n_samples", mc_samples},
                              {"holds", holds}};
        all_hold = all_hold && holds;
    }

    // Finite-sample deviations of weight sums and weighted vectors against
    // the parametric rate.
    {
        const double radius = 0.25 * stats.r_min;
        json block = json::array();
        for (const auto kind :
             {mixem::DeviationKind::weight_sum, mixem::DeviationKind::weighted_vector}) {
            const mixem::DeviationResult r = mixem::empirical_deviation(
                model, spec.n, probes, radius, kind,
                mixem::rng::derive(seed, mixem::rng::Purpose::probe,
                                   kind == mixem::DeviationKind::weight_sum ? 30000 : 30001));
            const bool holds = r.max_deviation <= r.rate_reference;
            block.push_back(
                {{"kind", kind == mixem::DeviationKind::weight_sum ? "weight_sum"
                                                                   : "weighted_vector"},
                 {"n", spec.n},
                 {"max_deviation", r.max_deviation},
                 {"rate_reference", r.rate_reference},
                 {"holds", holds}});
            all_hold = all_hold && holds;
        }
        doc["deviations"] = block;
    }

    doc["all_hold"] = all_hold;
    write_file(opts.out, "lemma_checks.json", doc.dump(2) + "\n");
    std::cout << "lemma checks: " << (all_hold ? "all hold" : "SOME FAILED") << "\n";
    return 0;
}

int cmd_fig1(const GlobalOptions& opts) {
    const mixem::ExperimentSpec spec = load_spec(opts);
    const mixem::MixtureModel model = mixem::build_model(spec);
    const std::vector<mixem::TrialResult> results = mixem::run_trials(spec);

    write_file(opts.out, "fig1_trials.csv", mixem::trials_to_csv(spec, model, results));
    write_file(opts.out, "fig1_summary.json", mixem::summary_to_json(spec, model, results));

    bool collapsed = false;
    for (const auto& r : results) {
        collapsed = collapsed || r.trajectory.stop_reason == mixem::StopReason::weight_collapse;
    }
    std::cout << "trials: " << results.size() << (collapsed ? " (weight collapse)" : "")
              << "\n";
    return collapsed ? 3 : 0;
}

int cmd_snr_sweep(const GlobalOptions& opts, const std::vector<double>& r_values) {
    if (r_values.empty()) throw std::invalid_argument("--r-values must not be empty");
    const mixem::ExperimentSpec spec = load_spec(opts);
    const std::vector<mixem::SweepRow> rows = mixem::snr_sweep(spec, r_values);
    write_file(opts.out, "snr_sweep.csv", mixem::sweep_to_csv(rows));
    std::cout << "sweep: " << r_values.size() << " separation scales\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EM for isotropic Gaussian location mixtures: simulation, theory "
                 "reports, and Monte Carlo checks"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config, "JSON experiment spec")
        ->check(CLI::ExistingFile);
    app.add_option("--out", opts.out, "output directory (default: current)");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override the master seed");
    int threads_value = 1;
    auto* threads_opt =
        app.add_option("--threads", threads_value, "worker threads (results do not depend on this)");

    auto* simulate = app.add_subcommand("simulate", "draw a dataset from the configured model");
    simulate->fallthrough();

    auto* em_run = app.add_subcommand("em-run", "run EM on a dataset file");
    em_run->fallthrough();
    std::string data_path;
    std::string init_path;
    em_run->add_option("--data", data_path, "dataset JSON from `simulate`")
        ->required()
        ->check(CLI::ExistingFile);
    em_run->add_option("--init", init_path, "initial centers JSON (default: random)")
        ->check(CLI::ExistingFile);

    auto* theory = app.add_subcommand("theory-report", "closed-form conditions and radii");
    theory->fallthrough();

    auto* verify = app.add_subcommand("verify-lemmas", "Monte Carlo checks of the bounds");
    verify->fallthrough();
    std::int64_t mc_samples = 100000;
    int probes = 50;
    int t_grid = 11;
    verify->add_option("--mc-samples", mc_samples, "samples per estimate");
    verify->add_option("--probes", probes, "random iterates per check");
    verify->add_option("--t-grid", t_grid, "segment grid points for the interaction suprema");

    auto* fig1 = app.add_subcommand("fig1", "trial batch: error curves vs iteration");
    fig1->fallthrough();

    auto* sweep = app.add_subcommand("snr-sweep", "trial batches across separation scales");
    sweep->fallthrough();
    std::vector<double> r_values{1.5, 2.0, 3.0, 4.0};
    sweep->add_option("--r-values", r_values, "separation scales")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (seed_opt->count() > 0) opts.seed = seed_value;
    if (threads_opt->count() > 0) opts.threads = threads_value;

    try {
        if (simulate->parsed()) return cmd_simulate(opts);
        if (em_run->parsed()) return cmd_em_run(opts, data_path, init_path);
        if (theory->parsed()) return cmd_theory_report(opts);
        if (verify->parsed()) return cmd_verify_lemmas(opts, mc_samples, probes, t_grid);
        if (fig1->parsed()) return cmd_fig1(opts);
        if (sweep->parsed()) return cmd_snr_sweep(opts, r_values);
    } catch (const mixem::WeightCollapseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
