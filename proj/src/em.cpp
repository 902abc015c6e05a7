#include "mixem/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixem/detail/parallel.hpp"
#include "mixem/rng.hpp"
#include "mixem/sampling.hpp"
#include "mixem/weights.hpp"

namespace mixem {

namespace {

constexpr Eigen::Index kBlockRows = 2048;
constexpr double kCollapseThreshold = 1e-300;

struct BlockSums {
    Eigen::MatrixXd weighted_points;  // M x d
    Eigen::VectorXd mass;             // M
};

// Stopping statistic: max_i |mu_i^+ - mu_i| / (1 + max_i |mu_i|).
double relative_change(const Eigen::MatrixXd& current, const Eigen::MatrixXd& next) {
    const double step = (next - current).rowwise().norm().maxCoeff();
    const double scale = 1.0 + current.rowwise().norm().maxCoeff();
    return step / scale;
}

}  // namespace

CenterSet em_step_points(const Eigen::MatrixXd& points, const CenterSet& iterate,
                         const Eigen::VectorXd& mixing_weights, int threads) {
    detail::check_iterate(iterate, mixing_weights, static_cast<int>(points.cols()));
    if (points.rows() < 1) throw std::invalid_argument("need at least one point");

    const Eigen::Index n = points.rows();
    const Eigen::Index blocks = (n + kBlockRows - 1) / kBlockRows;
    std::vector<BlockSums> partial(static_cast<std::size_t>(blocks));

    // The block grid is fixed by n alone; threads only schedule the blocks.
    detail::for_each_index(blocks, threads, [&](std::int64_t b) {
        const Eigen::Index lo = b * kBlockRows;
        const Eigen::Index rows = std::min(kBlockRows, n - lo);
        const auto x = points.middleRows(lo, rows);
        const Eigen::MatrixXd w = responsibilities(x, iterate, mixing_weights);
        partial[static_cast<std::size_t>(b)] =
            BlockSums{w.transpose() * x, w.colwise().sum().transpose()};
    });

    Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(iterate.components(), iterate.dim());
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(iterate.components());
    for (const BlockSums& p : partial) {
        weighted += p.weighted_points;
        mass += p.mass;
    }

    for (int i = 0; i < iterate.components(); ++i) {
        if (!(mass[i] >= kCollapseThreshold)) {
            throw WeightCollapseError(
                i, "weight collapse: component " + std::to_string(i) +
                       " holds total responsibility " + std::to_string(mass[i]));
        }
    }
    return CenterSet{weighted.array().colwise() / mass.array()};
}

CenterSet em_step_sample(const Dataset& data, const CenterSet& iterate,
                         const Eigen::VectorXd& mixing_weights, int threads) {
    return em_step_points(data.points, iterate, mixing_weights, threads);
}

CenterSet em_step_population(const MixtureModel& model, const CenterSet& iterate,
                             std::int64_t mc_samples, std::uint64_t seed, int threads) {
    if (mc_samples < 1) throw std::invalid_argument("mc_samples must be positive");
    Eigen::MatrixXd points(mc_samples, model.dim());
    auto gen = rng::stream(seed, rng::Purpose::population_step);
    sample_points(model, gen, points);
    return em_step_points(points, iterate, model.weights(), threads);
}

namespace {

double bottleneck_assignment(const Eigen::MatrixXd& dist) {
    const int m = static_cast<int>(dist.rows());
    std::vector<double> values(dist.data(), dist.data() + dist.size());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    // Feasibility of a perfect matching using only edges with dist <= cap,
    // via augmenting paths; bisect on the candidate cap values.
    auto feasible = [&](double cap) {
        std::vector<int> match_of_col(static_cast<std::size_t>(m), -1);
        std::vector<char> visited;
        std::function<bool(int)> augment = [&](int row) {
            for (int col = 0; col < m; ++col) {
                if (dist(row, col) > cap || visited[static_cast<std::size_t>(col)]) continue;
                visited[static_cast<std::size_t>(col)] = 1;
                int& owner = match_of_col[static_cast<std::size_t>(col)];
                if (owner < 0 || augment(owner)) {
                    owner = row;
                    return true;
                }
            }
            return false;
        };
        for (int row = 0; row < m; ++row) {
            visited.assign(static_cast<std::size_t>(m), 0);
            if (!augment(row)) return false;
        }
        return true;
    };

    std::size_t lo = 0, hi = values.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (feasible(values[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return values[lo];
}

}  // namespace

double statistical_error(const CenterSet& iterate, const MixtureModel& truth, Matching matching) {
    if (iterate.components() != truth.components() || iterate.dim() != truth.dim()) {
        throw std::invalid_argument("iterate shape does not match truth shape");
    }
    const int m = iterate.components();
    if (matching == Matching::identity) {
        double worst = 0.0;
        for (int i = 0; i < m; ++i) {
            worst = std::max(worst, (iterate.centers.row(i) - truth.centers().row(i)).norm());
        }
        return worst;
    }

    Eigen::MatrixXd dist(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            dist(i, j) = (iterate.centers.row(i) - truth.centers().row(j)).norm();

    if (m <= 8) {
        std::vector<int> perm(static_cast<std::size_t>(m));
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double worst = 0.0;
            for (int i = 0; i < m; ++i) worst = std::max(worst, dist(i, perm[static_cast<std::size_t>(i)]));
            best = std::min(best, worst);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    return bottleneck_assignment(dist);
}

namespace {

// Extends the iterate sequence in place until the stopping rule fires.
// Returns the stop reason; `step` maps an iterate to the next one.
template <typename Step>
StopReason drive(std::vector<CenterSet>& iterates, int max_iters, double rel_tol, Step&& step) {
    for (int t = 0; t < max_iters; ++t) {
        CenterSet next;
        try {
            next = step(iterates.back(), t);
        } catch (const WeightCollapseError&) {
            return StopReason::weight_collapse;
        }
        const double change = relative_change(iterates.back().centers, next.centers);
        iterates.push_back(std::move(next));
        if (change < rel_tol) return StopReason::rel_change_below_tol;
    }
    return StopReason::max_iters;
}

Trajectory assemble(std::vector<CenterSet> iterates, StopReason reason, const EmConfig& config,
                    const MixtureModel& truth, const CenterSet* limit) {
    Trajectory out;
    out.iterates = std::move(iterates);
    out.stop_reason = reason;
    out.stat_errors.reserve(out.iterates.size());
    for (const CenterSet& c : out.iterates) {
        out.stat_errors.push_back(statistical_error(c, truth, config.matching));
    }
    if (limit) {
        const MixtureModel proxy(limit->centers, truth.weights());
        std::vector<double> opt;
        opt.reserve(out.iterates.size());
        for (const CenterSet& c : out.iterates) {
            opt.push_back(statistical_error(c, proxy, config.matching));
        }
        out.opt_errors = std::move(opt);
    }
    return out;
}

}  // namespace

Trajectory run_em(const Dataset& data, const CenterSet& init, const EmConfig& config,
                  const MixtureModel& truth, bool record_opt_errors) {
    if (config.max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (!(config.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");

    auto step = [&](const CenterSet& cur, int) {
        return em_step_sample(data, cur, truth.weights(), config.threads);
    };

    if (!record_opt_errors) {
        std::vector<CenterSet> iterates{init};
        const StopReason reason = drive(iterates, config.max_iters, config.rel_tol, step);
        return assemble(std::move(iterates), reason, config, truth, nullptr);
    }

    // The sample update is a deterministic map, so the configured run is a
    // prefix of the longer run used to locate the EM limit. Run once to the
    // limit, then cut the trajectory where the configured rule would stop.
    const double limit_rel_tol = std::min(1e-10, config.rel_tol);
    const int limit_iters = std::max(500, config.max_iters);
    std::vector<CenterSet> iterates{init};
    const StopReason limit_reason = drive(iterates, limit_iters, limit_rel_tol, step);
    const CenterSet limit = iterates.back();

    std::size_t stop_index = iterates.size() - 1;
    StopReason reason = limit_reason == StopReason::weight_collapse ? StopReason::weight_collapse
                                                                    : StopReason::max_iters;
    for (std::size_t t = 1; t < iterates.size(); ++t) {
        if (static_cast<int>(t) > config.max_iters) {
            stop_index = t - 1;
            reason = StopReason::max_iters;
            break;
        }
        if (relative_change(iterates[t - 1].centers, iterates[t].centers) < config.rel_tol) {
            stop_index = t;
            reason = StopReason::rel_change_below_tol;
            break;
        }
    }
    iterates.resize(stop_index + 1);
    return assemble(std::move(iterates), reason, config, truth, &limit);
}

Trajectory run_em_population(const MixtureModel& model, const CenterSet& init,
                             const EmConfig& config, std::uint64_t seed) {
    if (config.max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (!(config.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
    auto step = [&](const CenterSet& cur, int t) {
        return em_step_population(model, cur, config.population_mc_samples,
                                  rng::derive(seed, rng::Purpose::population_step,
                                              static_cast<std::uint64_t>(t)),
                                  config.threads);
    };
    std::vector<CenterSet> iterates{init};
    const StopReason reason = drive(iterates, config.max_iters, config.rel_tol, step);
    return assemble(std::move(iterates), reason, config, model, nullptr);
}

}  // namespace mixem
