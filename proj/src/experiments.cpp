#include "mixem/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mixem/detail/parallel.hpp"
#include "mixem/rng.hpp"
#include "mixem/sampling.hpp"

namespace mixem {

namespace {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Eigen::VectorXd mixing_weights(const ExperimentSpec& spec) {
    switch (spec.weights_kind) {
        case WeightsKind::uniform:
            return Eigen::VectorXd::Constant(spec.m, 1.0 / spec.m);
        case WeightsKind::linear: {
            Eigen::VectorXd w(spec.m);
            const double total = spec.m * (spec.m + 1) / 2.0;
            for (int i = 0; i < spec.m; ++i) w[i] = (i + 1) / total;
            return w;
        }
        case WeightsKind::explicit_weights:
            return spec.explicit_weights;
    }
    throw std::invalid_argument("unknown weights kind");
}

}  // namespace

void ExperimentSpec::validate() const {
    if (m < 1) throw std::invalid_argument("M must be at least 1");
    if (d < 1) throw std::invalid_argument("d must be at least 1");
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (!(init_radius_fraction > 0.0 && init_radius_fraction <= 0.5)) {
        throw std::invalid_argument("init_radius_fraction must lie in (0, 0.5]");
    }
    if (em.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (!(em.rel_tol >= 0.0)) throw std::invalid_argument("rel_tol must be nonnegative");
    if (em.population_mc_samples < 1) {
        throw std::invalid_argument("population_mc_samples must be positive");
    }
    if (model_kind == ModelKind::simplex_plus_origin) {
        if (!(r_min_scale > 0.0)) throw std::invalid_argument("r_min_scale must be positive");
        if (m - 1 > d) {
            throw std::invalid_argument("simplex_plus_origin requires m - 1 <= d");
        }
    } else {
        if (explicit_centers.rows() != m || explicit_centers.cols() != d) {
            throw std::invalid_argument("explicit_centers must be an M x d matrix");
        }
    }
    if (weights_kind == WeightsKind::explicit_weights && explicit_weights.size() != m) {
        throw std::invalid_argument("explicit_weights must have M entries");
    }
}

MixtureModel build_model(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.model_kind == ModelKind::explicit_centers) {
        return MixtureModel(spec.explicit_centers, mixing_weights(spec));
    }
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(spec.m, spec.d);
    for (int j = 1; j < spec.m; ++j) centers(j, j - 1) = spec.r_min_scale;
    return MixtureModel(std::move(centers), mixing_weights(spec));
}

CenterSet perturbed_init(const MixtureModel& model, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0)) throw std::invalid_argument("fraction must be positive");
    const double reference =
        model.components() >= 2 ? separation_stats(model).r_min : 1.0;
    auto gen = rng::stream(seed, rng::Purpose::init);
    Eigen::MatrixXd centers = model.centers();
    for (int i = 0; i < model.components(); ++i) {
        centers.row(i) += sample_sphere(model.dim(), fraction * reference, gen).transpose();
    }
    return CenterSet{std::move(centers)};
}

double plateau_estimate(const std::vector<double>& stat_errors) {
    if (stat_errors.empty()) throw std::invalid_argument("empty error sequence");
    const std::size_t take = std::min<std::size_t>(3, stat_errors.size());
    double acc = 0.0;
    for (std::size_t i = stat_errors.size() - take; i < stat_errors.size(); ++i) {
        acc += stat_errors[i];
    }
    return acc / static_cast<double>(take);
}

int iterations_to_plateau(const std::vector<double>& stat_errors) {
    const double level = 1.1 * plateau_estimate(stat_errors);
    for (std::size_t t = 0; t < stat_errors.size(); ++t) {
        if (stat_errors[t] <= level) return static_cast<int>(t);
    }
    return static_cast<int>(stat_errors.size()) - 1;
}

std::vector<TrialResult> run_trials(const ExperimentSpec& spec) {
    spec.validate();
    const MixtureModel model = build_model(spec);
    std::vector<TrialResult> results(static_cast<std::size_t>(spec.trials));

    // Each trial owns a seed derived from (master_seed, trial index), so the
    // schedule cannot influence any draw; per-step threading is disabled
    // inside concurrent trials.
    EmConfig trial_config = spec.em;
    trial_config.threads = 1;
    detail::for_each_index(spec.trials, spec.em.threads, [&](std::int64_t k) {
        const std::uint64_t trial_seed =
            rng::derive(spec.master_seed, rng::Purpose::trial, static_cast<std::uint64_t>(k));
        const Dataset data = sample_dataset(model, spec.n, trial_seed);
        const CenterSet init = perturbed_init(model, spec.init_radius_fraction, trial_seed);
        TrialResult result;
        result.trial_index = static_cast<int>(k);
        result.seed = trial_seed;
        result.trajectory = run_em(data, init, trial_config, model, /*record_opt_errors=*/true);
        result.plateau_estimate = plateau_estimate(result.trajectory.stat_errors);
        result.iterations_to_plateau = iterations_to_plateau(result.trajectory.stat_errors);
        results[static_cast<std::size_t>(k)] = std::move(result);
    });
    return results;
}

std::vector<SweepRow> snr_sweep(const ExperimentSpec& base, const std::vector<double>& r_values) {
    if (r_values.empty()) throw std::invalid_argument("need at least one separation value");
    std::vector<SweepRow> rows;
    for (const double r : r_values) {
        ExperimentSpec spec = base;
        spec.r_min_scale = r;
        const std::vector<TrialResult> results = run_trials(spec);

        std::size_t longest = 0;
        for (const TrialResult& t : results) {
            longest = std::max(longest, t.trajectory.stat_errors.size());
        }
        for (std::size_t it = 0; it < longest; ++it) {
            double sum = 0.0;
            double log_sum = 0.0;
            for (const TrialResult& t : results) {
                const auto& errs = t.trajectory.stat_errors;
                const double e = it < errs.size() ? errs[it] : errs.back();
                sum += e;
                log_sum += std::log(std::max(e, 1e-300));
            }
            SweepRow row;
            row.r_min = r;
            row.iteration = static_cast<int>(it);
            row.mean_stat_error = sum / static_cast<double>(results.size());
            row.mean_log_stat_error = log_sum / static_cast<double>(results.size());
            rows.push_back(row);
        }
    }
    return rows;
}

// --- serialization ---------------------------------------------------------

const char* to_string(ModelKind kind) {
    return kind == ModelKind::simplex_plus_origin ? "simplex_plus_origin" : "explicit_centers";
}

const char* to_string(WeightsKind kind) {
    switch (kind) {
        case WeightsKind::uniform: return "uniform";
        case WeightsKind::linear: return "linear";
        case WeightsKind::explicit_weights: return "explicit";
    }
    return "unknown";
}

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::max_iters: return "max_iters";
        case StopReason::rel_change_below_tol: return "rel_change_below_tol";
        case StopReason::weight_collapse: return "weight_collapse";
    }
    return "unknown";
}

const char* to_string(Matching matching) {
    return matching == Matching::identity ? "identity" : "best_permutation";
}

namespace {

ModelKind model_kind_from(const std::string& s) {
    if (s == "simplex_plus_origin") return ModelKind::simplex_plus_origin;
    if (s == "explicit_centers" || s == "explicit") return ModelKind::explicit_centers;
    throw std::invalid_argument("unknown model_kind: " + s);
}

WeightsKind weights_kind_from(const std::string& s) {
    if (s == "uniform") return WeightsKind::uniform;
    if (s == "linear" || s == "linear_i_over_sum") return WeightsKind::linear;
    if (s == "explicit" || s == "explicit_weights") return WeightsKind::explicit_weights;
    throw std::invalid_argument("unknown weights_kind: " + s);
}

Matching matching_from(const std::string& s) {
    if (s == "identity") return Matching::identity;
    if (s == "best_permutation") return Matching::best_permutation;
    throw std::invalid_argument("unknown matching: " + s);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw std::invalid_argument("expected a matrix");
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = static_cast<Eigen::Index>(rows.at(0).size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const json& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != c) {
            throw std::invalid_argument("ragged matrix rows");
        }
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row.at(static_cast<std::size_t>(j));
    }
    return m;
}

}  // namespace

std::string spec_to_json(const ExperimentSpec& spec) {
    json j;
    j["model_kind"] = to_string(spec.model_kind);
    j["M"] = spec.m;
    j["d"] = spec.d;
    j["r_min_scale"] = spec.r_min_scale;
    j["weights_kind"] = to_string(spec.weights_kind);
    if (spec.model_kind == ModelKind::explicit_centers) {
        j["explicit_centers"] = matrix_to_json(spec.explicit_centers);
    }
    if (spec.weights_kind == WeightsKind::explicit_weights) {
        json w = json::array();
        for (Eigen::Index i = 0; i < spec.explicit_weights.size(); ++i) {
            w.push_back(spec.explicit_weights[i]);
        }
        j["explicit_weights"] = std::move(w);
    }
    j["n"] = spec.n;
    j["trials"] = spec.trials;
    j["init_radius_fraction"] = spec.init_radius_fraction;
    j["em"] = {{"max_iters", spec.em.max_iters},
               {"rel_tol", spec.em.rel_tol},
               {"population_mc_samples", spec.em.population_mc_samples},
               {"matching", to_string(spec.em.matching)}};
    j["master_seed"] = spec.master_seed;
    j["constants"] = {{"c0", spec.constants.c0},
                      {"c1", spec.constants.c1},
                      {"c2", spec.constants.c2},
                      {"c3", spec.constants.c3}};
    return j.dump(2) + "\n";
}

ExperimentSpec spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentSpec spec;
    try {
        if (j.contains("model_kind")) spec.model_kind = model_kind_from(j["model_kind"]);
        if (j.contains("M")) spec.m = j["M"].get<int>();
        if (j.contains("d")) spec.d = j["d"].get<int>();
        if (j.contains("r_min_scale")) spec.r_min_scale = j["r_min_scale"].get<double>();
        if (j.contains("weights_kind")) spec.weights_kind = weights_kind_from(j["weights_kind"]);
        if (j.contains("explicit_centers")) {
            spec.explicit_centers = matrix_from_json(j["explicit_centers"]);
        }
        if (j.contains("explicit_weights")) {
            const auto& w = j["explicit_weights"];
            spec.explicit_weights.resize(static_cast<Eigen::Index>(w.size()));
            for (std::size_t i = 0; i < w.size(); ++i) {
                spec.explicit_weights[static_cast<Eigen::Index>(i)] = w.at(i).get<double>();
            }
        }
        if (j.contains("n")) spec.n = j["n"].get<std::int64_t>();
        if (j.contains("trials")) spec.trials = j["trials"].get<int>();
        if (j.contains("init_radius_fraction")) {
            spec.init_radius_fraction = j["init_radius_fraction"].get<double>();
        }
        if (j.contains("em")) {
            const json& em = j["em"];
            if (em.contains("max_iters")) spec.em.max_iters = em["max_iters"].get<int>();
            if (em.contains("rel_tol")) spec.em.rel_tol = em["rel_tol"].get<double>();
            if (em.contains("population_mc_samples")) {
                spec.em.population_mc_samples = em["population_mc_samples"].get<std::int64_t>();
            }
            if (em.contains("matching")) spec.em.matching = matching_from(em["matching"]);
        }
        if (j.contains("master_seed")) spec.master_seed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("constants")) {
            const json& c = j["constants"];
            if (c.contains("c0")) spec.constants.c0 = c["c0"].get<double>();
            if (c.contains("c1")) spec.constants.c1 = c["c1"].get<double>();
            if (c.contains("c2")) spec.constants.c2 = c["c2"].get<double>();
            if (c.contains("c3")) spec.constants.c3 = c["c3"].get<double>();
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed config: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string trials_to_csv(const ExperimentSpec& spec, const MixtureModel& model,
                          const std::vector<TrialResult>& results) {
    const double r_min =
        model.components() >= 2 ? separation_stats(model).r_min : 0.0;
    std::string out = "trial,iteration,stat_error,opt_error,r_min,n,weights_kind,seed\n";
    for (const TrialResult& trial : results) {
        const auto& errs = trial.trajectory.stat_errors;
        for (std::size_t t = 0; t < errs.size(); ++t) {
            out += std::to_string(trial.trial_index);
            out += ',';
            out += std::to_string(t);
            out += ',';
            out += format_double(errs[t]);
            out += ',';
            out += trial.trajectory.opt_errors
                       ? format_double((*trial.trajectory.opt_errors)[t])
                       : std::string();
            out += ',';
            out += format_double(r_min);
            out += ',';
            out += std::to_string(spec.n);
            out += ',';
            out += to_string(spec.weights_kind);
            out += ',';
            out += std::to_string(trial.seed);
            out += '\n';
        }
    }
    return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "r_min,iteration,mean_stat_error,mean_log_stat_error\n";
    for (const SweepRow& row : rows) {
        out += format_double(row.r_min);
        out += ',';
        out += std::to_string(row.iteration);
        out += ',';
        out += format_double(row.mean_stat_error);
        out += ',';
        out += format_double(row.mean_log_stat_error);
        out += '\n';
    }
    return out;
}

std::string summary_to_json(const ExperimentSpec& spec, const MixtureModel& model,
                            const std::vector<TrialResult>& results) {
    json j;
    j["spec"] = json::parse(spec_to_json(spec));
    const SeparationStats stats = separation_stats(model);
    const double init_error =
        spec.init_radius_fraction * (model.components() >= 2 ? stats.r_min : 1.0);
    j["theory_report"] =
        json::parse(report_to_json(theory_report(stats, init_error, spec.n, spec.constants)));
    if (spec.model_kind == ModelKind::simplex_plus_origin) {
        j["simplex_vertices"] = "e1..e" + std::to_string(spec.m - 1);
    }
    json trials = json::array();
    for (const TrialResult& trial : results) {
        json t;
        t["trial"] = trial.trial_index;
        t["seed"] = trial.seed;
        t["iterations"] = trial.trajectory.iterations();
        t["stop_reason"] = to_string(trial.trajectory.stop_reason);
        t["plateau_estimate"] = trial.plateau_estimate;
        t["iterations_to_plateau"] = trial.iterations_to_plateau;
        t["final_stat_error"] = trial.trajectory.stat_errors.back();
        if (trial.trajectory.opt_errors) {
            t["final_opt_error"] = trial.trajectory.opt_errors->back();
        }
        trials.push_back(std::move(t));
    }
    j["trials"] = std::move(trials);
    return j.dump(2) + "\n";
}

std::string dataset_to_json(const MixtureModel& model, const Dataset& data) {
    json j;
    j["model"] = {{"centers", matrix_to_json(model.centers())},
                  {"weights", json::array()}};
    for (Eigen::Index i = 0; i < model.weights().size(); ++i) {
        j["model"]["weights"].push_back(model.weights()[i]);
    }
    j["seed"] = data.seed;
    j["source_model_digest"] = data.source_model_digest;
    j["points"] = matrix_to_json(data.points);
    json labels = json::array();
    for (const std::int32_t label : data.labels()) labels.push_back(label);
    j["labels"] = std::move(labels);
    return j.dump() + "\n";
}

std::pair<MixtureModel, Dataset> dataset_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("dataset is not valid JSON: ") + e.what());
    }
    try {
        const json& model_j = j.at("model");
        const Eigen::MatrixXd centers = matrix_from_json(model_j.at("centers"));
        Eigen::VectorXd weights(static_cast<Eigen::Index>(model_j.at("weights").size()));
        for (std::size_t i = 0; i < model_j.at("weights").size(); ++i) {
            weights[static_cast<Eigen::Index>(i)] = model_j.at("weights").at(i).get<double>();
        }
        MixtureModel model(centers, weights);
        Dataset data;
        data.points = matrix_from_json(j.at("points"));
        data.seed = j.at("seed").get<std::uint64_t>();
        data.source_model_digest = j.at("source_model_digest").get<std::uint64_t>();
        if (j.contains("labels")) {
            for (const auto& label : j["labels"]) {
                data.labels_.push_back(label.get<std::int32_t>());
            }
        }
        if (data.points.cols() != model.dim()) {
            throw std::invalid_argument("dataset dimension does not match its model");
        }
        return {std::move(model), std::move(data)};
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed dataset: ") + e.what());
    }
}

std::string centers_to_json(const CenterSet& centers) {
    json j;
    j["centers"] = matrix_to_json(centers.centers);
    return j.dump(2) + "\n";
}

CenterSet centers_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("centers file is not valid JSON: ") + e.what());
    }
    try {
        return CenterSet{matrix_from_json(j.at("centers"))};
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed centers file: ") + e.what());
    }
}

}  // namespace mixem
