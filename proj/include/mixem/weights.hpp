#pragma once

#include "mixem/types.hpp"

namespace mixem {

// log of the mixture density at x under unit-covariance Gaussian components,
// evaluated fully in log space so distant x never underflow.
double log_density(const Eigen::VectorXd& x, const MixtureModel& model);

// Posterior component probabilities at x for the given candidate centers and
// known mixing weights. Output is strictly positive and sums to 1 for any
// finite x, including very distant ones.
Eigen::VectorXd posterior_weights(const Eigen::VectorXd& x, const CenterSet& iterate,
                                  const Eigen::VectorXd& mixing_weights);

// Jacobian of the posterior weight of `component` with respect to the stacked
// centers, one row per center: row c is -w_c (1 - w_c) (mu_c - x) and row
// j != c is w_c w_j (mu_j - x).
Eigen::MatrixXd grad_weight(const Eigen::VectorXd& x, const CenterSet& iterate,
                            const Eigen::VectorXd& mixing_weights, int component);

// Posterior weights for a block of points, one row per point. Row softmax is
// computed with per-row max subtraction; only score differences matter, so
// the shared -|x|^2/2 term is dropped.
Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& points, const CenterSet& iterate,
                                 const Eigen::VectorXd& mixing_weights);

namespace detail {
void check_iterate(const CenterSet& iterate, const Eigen::VectorXd& mixing_weights, int dim);
}

}  // namespace mixem
