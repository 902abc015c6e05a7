#include "mixem/weights.hpp"

#include <cmath>

namespace mixem {

namespace detail {

void check_iterate(const CenterSet& iterate, const Eigen::VectorXd& mixing_weights, int dim) {
    if (iterate.components() < 1) {
        throw std::invalid_argument("iterate must have at least one center");
    }
    if (iterate.dim() != dim) {
        throw std::invalid_argument("center dimension does not match point dimension");
    }
    if (mixing_weights.size() != iterate.components()) {
        throw std::invalid_argument("mixing weight count does not match center count");
    }
    if (!(mixing_weights.minCoeff() > 0.0)) {
        throw std::invalid_argument("mixing weights must be strictly positive");
    }
}

// Per-component log scores log pi_j - |x - mu_j|^2 / 2 (normalizer dropped).
Eigen::VectorXd log_scores(const Eigen::VectorXd& x, const Eigen::MatrixXd& centers,
                           const Eigen::VectorXd& log_weights) {
    Eigen::VectorXd s(centers.rows());
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {
        s[j] = log_weights[j] - 0.5 * (x - centers.row(j).transpose()).squaredNorm();
    }
    return s;
}

}  // namespace detail

double log_density(const Eigen::VectorXd& x, const MixtureModel& model) {
    if (x.size() != model.dim()) {
        throw std::invalid_argument("point dimension does not match model dimension");
    }
    const Eigen::VectorXd log_w = model.weights().array().log();
    Eigen::VectorXd s = detail::log_scores(x, model.centers(), log_w);
    const double m = s.maxCoeff();
    const double lse = m + std::log((s.array() - m).exp().sum());
    constexpr double half_log_two_pi = 0.91893853320467274178;
    return lse - model.dim() * half_log_two_pi;
}

Eigen::VectorXd posterior_weights(const Eigen::VectorXd& x, const CenterSet& iterate,
                                  const Eigen::VectorXd& mixing_weights) {
    detail::check_iterate(iterate, mixing_weights, static_cast<int>(x.size()));
    const Eigen::VectorXd log_w = mixing_weights.array().log();
    Eigen::VectorXd s = detail::log_scores(x, iterate.centers, log_w);
    const double m = s.maxCoeff();
    Eigen::VectorXd w = (s.array() - m).exp();
    return w / w.sum();
}

Eigen::MatrixXd grad_weight(const Eigen::VectorXd& x, const CenterSet& iterate,
                            const Eigen::VectorXd& mixing_weights, int component) {
    if (component < 0 || component >= iterate.components()) {
        throw std::out_of_range("component index out of range");
    }
    const Eigen::VectorXd w = posterior_weights(x, iterate, mixing_weights);
    const double wc = w[component];
    Eigen::MatrixXd g(iterate.components(), iterate.dim());
    for (int j = 0; j < iterate.components(); ++j) {
        const Eigen::RowVectorXd diff = iterate.centers.row(j) - x.transpose();
        if (j == component) {
            g.row(j) = -wc * (1.0 - wc) * diff;
        } else {
            g.row(j) = wc * w[j] * diff;
        }
    }
    return g;
}

Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& points, const CenterSet& iterate,
                                 const Eigen::VectorXd& mixing_weights) {
    detail::check_iterate(iterate, mixing_weights, static_cast<int>(points.cols()));
    // scores_ij = x_i . mu_j - |mu_j|^2/2 + log pi_j; equal to the full log
    // posterior up to a per-row constant, which the row softmax removes.
    const Eigen::VectorXd offset =
        mixing_weights.array().log().matrix() - 0.5 * iterate.centers.rowwise().squaredNorm();
    Eigen::MatrixXd scores = points * iterate.centers.transpose();
    scores.rowwise() += offset.transpose();
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double m = scores.row(i).maxCoeff();
        scores.row(i) = (scores.row(i).array() - m).exp();
        scores.row(i) /= scores.row(i).sum();
    }
    return scores;
}

}  // namespace mixem
