#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixem/types.hpp"

namespace mixem {

enum class Matching { identity, best_permutation };

enum class StopReason { max_iters, rel_change_below_tol, weight_collapse };

// Thrown by an EM step when some component's responsibility mass over the
// data falls below 1e-300, at which point the update for that center is
// numerically meaningless.
class WeightCollapseError : public std::runtime_error {
  public:
    WeightCollapseError(int component, std::string what)
        : std::runtime_error(std::move(what)), component_(component) {}
    int component() const { return component_; }

  private:
    int component_;
};

struct EmConfig {
    int max_iters = 500;
    // Stop when max_i |mu_i_next - mu_i| / (1 + max_i |mu_i|) < rel_tol.
    double rel_tol = 1e-8;
    std::int64_t population_mc_samples = 100000;
    Matching matching = Matching::identity;
    int threads = 1;
};

struct Trajectory {
    std::vector<CenterSet> iterates;      // element 0 is the initializer
    std::vector<double> stat_errors;      // distance to the true centers, per iterate
    std::optional<std::vector<double>> opt_errors;  // distance to the EM limit, per iterate
    StopReason stop_reason = StopReason::max_iters;

    int iterations() const { return static_cast<int>(iterates.size()) - 1; }
};

// One EM update of the centers on a finite sample, mixing weights held fixed.
// Sums are accumulated over fixed-size row blocks that are reduced in block
// order, so the result is bit-identical for any thread count.
CenterSet em_step_sample(const Dataset& data, const CenterSet& iterate,
                         const Eigen::VectorXd& mixing_weights, int threads = 1);

// Same update on points supplied directly.
CenterSet em_step_points(const Eigen::MatrixXd& points, const CenterSet& iterate,
                         const Eigen::VectorXd& mixing_weights, int threads = 1);

// One idealized EM update, with the data expectation replaced by a Monte
// Carlo average over mc_samples fresh draws from the model. Deterministic
// given the seed.
CenterSet em_step_population(const MixtureModel& model, const CenterSet& iterate,
                             std::int64_t mc_samples, std::uint64_t seed, int threads = 1);

// max_i |mu_i - mu*_i| after matching iterate components to truth components.
// best_permutation minimizes the max distance: exact enumeration for M <= 8,
// threshold bisection with bipartite matching above that.
double statistical_error(const CenterSet& iterate, const MixtureModel& truth,
                         Matching matching = Matching::identity);

// Runs EM on the sample until the relative center change drops below
// config.rel_tol or config.max_iters is reached. stat_errors are recorded at
// every iterate. With record_opt_errors, the run is first continued to the
// EM limit (rel tol 1e-10) and opt_errors are measured against that limit.
// A weight collapse ends and truncates the trajectory rather than throwing.
Trajectory run_em(const Dataset& data, const CenterSet& init, const EmConfig& config,
                  const MixtureModel& truth, bool record_opt_errors = false);

// Population-update analogue of run_em; step t uses a stream derived from
// (seed, t), so the whole trajectory is a function of (model, init, seed).
Trajectory run_em_population(const MixtureModel& model, const CenterSet& init,
                             const EmConfig& config, std::uint64_t seed);

}  // namespace mixem
