#include "mixem/verify.hpp"

#include <cmath>

#include "mixem/rng.hpp"
#include "mixem/sampling.hpp"
#include "mixem/theory.hpp"
#include "mixem/weights.hpp"

namespace mixem {

namespace {

Eigen::MatrixXd draw(const MixtureModel& model, std::int64_t count, std::uint64_t seed,
                     rng::Purpose purpose, std::uint64_t index = 0) {
    Eigen::MatrixXd points(count, model.dim());
    auto gen = rng::stream(seed, purpose, index);
    sample_points(model, gen, points);
    return points;
}

}  // namespace

double operator_norm(const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd gram = a.transpose() * a;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(gram.rows());
    v.normalize();
    double value = 0.0;
    for (int iter = 0; iter < 1000; ++iter) {
        Eigen::VectorXd next = gram * v;
        const double norm = next.norm();
        if (norm == 0.0) return 0.0;
        next /= norm;
        if (std::abs(norm - value) <= 1e-14 * std::max(1.0, norm)) {
            value = norm;
            break;
        }
        value = norm;
        v = next;
    }
    return std::sqrt(value);
}

LemmaCheckResult estimate_weight_mass(const MixtureModel& model, const CenterSet& iterate,
                                      int component, std::int64_t mc_samples,
                                      std::uint64_t seed) {
    if (component < 0 || component >= iterate.components()) {
        throw std::out_of_range("component index out of range");
    }
    if (mc_samples < 2) throw std::invalid_argument("mc_samples must be at least 2");
    const Eigen::MatrixXd points = draw(model, mc_samples, seed, rng::Purpose::probe);
    const Eigen::MatrixXd w = responsibilities(points, iterate, model.weights());

    const double n = static_cast<double>(mc_samples);
    const double mean = w.col(component).sum() / n;
    const double var =
        (w.col(component).array() - mean).square().sum() / (n - 1.0);

    LemmaCheckResult result;
    result.estimate = mean;
    result.bound = 0.75 * model.weights().minCoeff();
    result.mc_std_error = std::sqrt(var / n);
    result.n_samples = mc_samples;
    result.holds = result.estimate - 3.0 * result.mc_std_error >= result.bound;
    return result;
}

double weight_mass_probe_radius(const MixtureModel& model) {
    const SeparationStats stats = separation_stats(model);
    const double admissible = weight_mass_radius(stats);
    return admissible > 0.0 ? admissible : 0.25 * stats.r_min;
}

double estimate_v(const MixtureModel& model, const CenterSet& iterate_start,
                  const CenterSet& iterate_end, int component, int t_grid,
                  std::int64_t mc_samples, std::uint64_t seed) {
    if (component < 0 || component >= iterate_start.components()) {
        throw std::out_of_range("component index out of range");
    }
    if (iterate_start.components() != iterate_end.components() ||
        iterate_start.dim() != iterate_end.dim()) {
        throw std::invalid_argument("segment endpoints must share shape");
    }
    if (t_grid < 2) throw std::invalid_argument("t_grid must be at least 2");
    if (mc_samples < 1) throw std::invalid_argument("mc_samples must be positive");

    const Eigen::MatrixXd points = draw(model, mc_samples, seed, rng::Purpose::probe);
    const Eigen::MatrixXd left =
        points.rowwise() - iterate_start.centers.row(0);  // X - s_1, fixed across the grid

    double sup = 0.0;
    for (int k = 0; k < t_grid; ++k) {
        const double t = static_cast<double>(k) / (t_grid - 1);
        const CenterSet at_t{iterate_start.centers +
                             t * (iterate_end.centers - iterate_start.centers)};
        const Eigen::MatrixXd w = responsibilities(points, at_t, model.weights());
        Eigen::ArrayXd coef = w.col(0).array();
        if (component == 0) {
            coef *= (1.0 - coef);
        } else {
            coef *= w.col(component).array();
        }
        const Eigen::MatrixXd right = points.rowwise() - at_t.centers.row(component);
        const Eigen::MatrixXd outer =
            (left.array().colwise() * coef).matrix().transpose() * right /
            static_cast<double>(mc_samples);
        sup = std::max(sup, operator_norm(outer));
    }
    return sup;
}

double fixed_point_residual(const MixtureModel& model, std::int64_t mc_samples,
                            std::uint64_t seed) {
    if (mc_samples < 1) throw std::invalid_argument("mc_samples must be positive");
    const Eigen::MatrixXd points = draw(model, mc_samples, seed, rng::Purpose::probe);
    const Eigen::MatrixXd w = responsibilities(points, model.center_set(), model.weights());
    double worst = 0.0;
    for (int i = 0; i < model.components(); ++i) {
        const Eigen::MatrixXd centered = points.rowwise() - model.centers().row(i);
        const Eigen::RowVectorXd mean =
            (centered.array().colwise() * w.col(i).array()).matrix().colwise().sum() /
            static_cast<double>(mc_samples);
        worst = std::max(worst, mean.norm());
    }
    return worst;
}

DeviationResult empirical_deviation(const MixtureModel& model, std::int64_t n, int probe_count,
                                    double radius, DeviationKind kind, std::uint64_t seed,
                                    std::int64_t population_samples) {
    if (n < 1 || population_samples < 1) throw std::invalid_argument("sample sizes must be positive");
    if (probe_count < 1) throw std::invalid_argument("probe_count must be positive");
    if (!(radius >= 0.0)) throw std::invalid_argument("radius must be nonnegative");

    const int m = model.components();
    const int d = model.dim();
    const Eigen::MatrixXd data = draw(model, n, seed, rng::Purpose::data);
    const Eigen::MatrixXd reference = draw(model, population_samples, seed, rng::Purpose::reference);
    auto probe_gen = rng::stream(seed, rng::Purpose::probe);

    double worst = 0.0;
    for (int p = 0; p < probe_count; ++p) {
        Eigen::MatrixXd centers = model.centers();
        for (int i = 0; i < m; ++i) {
            centers.row(i) += sample_ball(d, radius, probe_gen).transpose();
        }
        const CenterSet probe{std::move(centers)};
        const Eigen::MatrixXd w_data = responsibilities(data, probe, model.weights());
        const Eigen::MatrixXd w_ref = responsibilities(reference, probe, model.weights());
        for (int i = 0; i < m; ++i) {
            if (kind == DeviationKind::weight_sum) {
                const double empirical = w_data.col(i).mean();
                const double population = w_ref.col(i).mean();
                worst = std::max(worst, std::abs(empirical - population));
            } else {
                const Eigen::RowVectorXd empirical =
                    (data.array().colwise() * w_data.col(i).array()).matrix().colwise().sum() /
                        static_cast<double>(n) -
                    w_data.col(i).mean() * model.centers().row(i);
                const Eigen::RowVectorXd population =
                    (reference.array().colwise() * w_ref.col(i).array()).matrix().colwise().sum() /
                        static_cast<double>(population_samples) -
                    w_ref.col(i).mean() * model.centers().row(i);
                worst = std::max(worst, (empirical - population).norm());
            }
        }
    }

    DeviationResult result;
    result.max_deviation = worst;
    result.rate_reference = std::sqrt(static_cast<double>(m) * d *
                                      std::log(static_cast<double>(n)) / static_cast<double>(n));
    if (kind == DeviationKind::weighted_vector) {
        const SeparationStats stats = separation_stats(model);
        result.rate_reference *= 1.5 * stats.r_max;
    }
    return result;
}

namespace quadrature {

namespace {

// Composite Simpson over [lo, hi]; the panel count is fixed and odd so the
// oracle is deterministic.
double simpson(const std::function<double(double)>& f, double lo, double hi, int nodes = 40001) {
    const double h = (hi - lo) / (nodes - 1);
    double acc = f(lo) + f(hi);
    for (int i = 1; i < nodes - 1; ++i) {
        acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

void require_1d(const MixtureModel& model) {
    if (model.dim() != 1) throw std::invalid_argument("quadrature oracle requires d = 1");
}

double density(const MixtureModel& model, double x) {
    double acc = 0.0;
    constexpr double inv_sqrt_two_pi = 0.39894228040143267794;
    for (int j = 0; j < model.components(); ++j) {
        const double z = x - model.centers()(j, 0);
        acc += model.weights()[j] * inv_sqrt_two_pi * std::exp(-0.5 * z * z);
    }
    return acc;
}

Eigen::VectorXd weights_at(const MixtureModel& model, const CenterSet& iterate, double x) {
    Eigen::VectorXd point(1);
    point[0] = x;
    return posterior_weights(point, iterate, model.weights());
}

std::pair<double, double> span(const MixtureModel& model, const CenterSet& iterate) {
    const double lo =
        std::min(model.centers().minCoeff(), iterate.centers.minCoeff()) - 45.0;
    const double hi =
        std::max(model.centers().maxCoeff(), iterate.centers.maxCoeff()) + 45.0;
    return {lo, hi};
}

}  // namespace

double integrate_against_density(const MixtureModel& model,
                                 const std::function<double(double)>& f) {
    require_1d(model);
    const double lo = model.centers().minCoeff() - 45.0;
    const double hi = model.centers().maxCoeff() + 45.0;
    return simpson([&](double x) { return f(x) * density(model, x); }, lo, hi);
}

double expected_weight(const MixtureModel& model, const CenterSet& iterate, int component) {
    require_1d(model);
    const auto [lo, hi] = span(model, iterate);
    return simpson(
        [&](double x) { return weights_at(model, iterate, x)[component] * density(model, x); },
        lo, hi);
}

Eigen::VectorXd population_step(const MixtureModel& model, const CenterSet& iterate) {
    require_1d(model);
    const auto [lo, hi] = span(model, iterate);
    Eigen::VectorXd next(iterate.components());
    for (int i = 0; i < iterate.components(); ++i) {
        const double numerator = simpson(
            [&](double x) { return weights_at(model, iterate, x)[i] * x * density(model, x); },
            lo, hi);
        const double denominator = simpson(
            [&](double x) { return weights_at(model, iterate, x)[i] * density(model, x); }, lo,
            hi);
        next[i] = numerator / denominator;
    }
    return next;
}

double v_supremum(const MixtureModel& model, const CenterSet& iterate_start,
                  const CenterSet& iterate_end, int component, int t_grid) {
    require_1d(model);
    if (t_grid < 2) throw std::invalid_argument("t_grid must be at least 2");
    const double s1 = iterate_start.centers(0, 0);
    double sup = 0.0;
    for (int k = 0; k < t_grid; ++k) {
        const double t = static_cast<double>(k) / (t_grid - 1);
        const CenterSet at_t{iterate_start.centers +
                             t * (iterate_end.centers - iterate_start.centers)};
        const auto [lo, hi] = span(model, at_t);
        const double value = simpson(
            [&](double x) {
                const Eigen::VectorXd w = weights_at(model, at_t, x);
                const double coef =
                    component == 0 ? w[0] * (1.0 - w[0]) : w[0] * w[component];
                return coef * (x - s1) * (x - at_t.centers(component, 0)) * density(model, x);
            },
            lo, hi);
        sup = std::max(sup, std::abs(value));
    }
    return sup;
}

}  // namespace quadrature

}  // namespace mixem
