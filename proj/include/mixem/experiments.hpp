#pragma once

#include <string>
#include <vector>

#include "mixem/em.hpp"
#include "mixem/theory.hpp"
#include "mixem/types.hpp"

namespace mixem {

enum class ModelKind { simplex_plus_origin, explicit_centers };
enum class WeightsKind { uniform, linear, explicit_weights };

// Complete description of a trial batch. (spec, master_seed) determines every
// output byte, independent of thread count.
struct ExperimentSpec {
    ModelKind model_kind = ModelKind::simplex_plus_origin;
    int m = 5;
    int d = 10;
    double r_min_scale = 2.0;
    WeightsKind weights_kind = WeightsKind::uniform;
    Eigen::MatrixXd explicit_centers;  // used when model_kind == explicit_centers
    Eigen::VectorXd explicit_weights;  // used when weights_kind == explicit_weights
    std::int64_t n = 8000;
    int trials = 10;
    double init_radius_fraction = 0.4;
    EmConfig em;
    std::uint64_t master_seed = 99;
    TheoryConstants constants;

    void validate() const;
};

struct TrialResult {
    int trial_index = 0;
    std::uint64_t seed = 0;
    Trajectory trajectory;
    double plateau_estimate = 0.0;   // mean of the last (up to) 3 recorded errors
    int iterations_to_plateau = 0;   // first t with stat_error <= 1.1 * plateau_estimate
};

struct SweepRow {
    double r_min = 0.0;
    int iteration = 0;
    double mean_stat_error = 0.0;
    double mean_log_stat_error = 0.0;
};

// Builds the model described by the spec. simplex_plus_origin places one
// center at the origin and centers r_min_scale * e_j for j = 1..m-1 (requires
// m - 1 <= d); its pairwise separations are r_min_scale and r_min_scale*sqrt(2).
MixtureModel build_model(const ExperimentSpec& spec);

// True centers displaced independently and uniformly on the sphere of radius
// fraction * r_min (fraction * 1 for a single component), so the initial
// error is exactly that radius.
CenterSet perturbed_init(const MixtureModel& model, double fraction, std::uint64_t seed);

// Runs spec.trials independent trials. Trial k derives its own seed from
// (master_seed, k) and records opt errors against the trial's EM limit.
// Trials may execute concurrently (spec.em.threads); results are assembled
// in trial order.
std::vector<TrialResult> run_trials(const ExperimentSpec& spec);

// Reruns the spec at each separation scale with the same master seed and
// averages log stat errors per iteration; converged trajectories hold their
// final error so every iteration averages over all trials.
std::vector<SweepRow> snr_sweep(const ExperimentSpec& base, const std::vector<double>& r_values);

double plateau_estimate(const std::vector<double>& stat_errors);
int iterations_to_plateau(const std::vector<double>& stat_errors);

// --- serialization -------------------------------------------------------

std::string spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const std::string& text);

// Trial rows: trial, iteration, stat_error, opt_error, r_min, n,
// weights_kind, seed. Numbers are printed with %.17g, so re-emitting the
// same results yields identical bytes.
std::string trials_to_csv(const ExperimentSpec& spec, const MixtureModel& model,
                          const std::vector<TrialResult>& results);

// Sweep rows: r_min, iteration, mean_stat_error, mean_log_stat_error.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// Full record of a batch: the spec, the model's theory report, and per-trial
// summaries.
std::string summary_to_json(const ExperimentSpec& spec, const MixtureModel& model,
                            const std::vector<TrialResult>& results);

// Dataset files embed the generating model so a run can compute stat errors
// without re-reading the spec.
std::string dataset_to_json(const MixtureModel& model, const Dataset& data);
std::pair<MixtureModel, Dataset> dataset_from_json(const std::string& text);

std::string centers_to_json(const CenterSet& centers);
CenterSet centers_from_json(const std::string& text);

const char* to_string(ModelKind kind);
const char* to_string(WeightsKind kind);
const char* to_string(StopReason reason);
const char* to_string(Matching matching);

}  // namespace mixem
