#pragma once

#include <random>

#include "mixem/rng.hpp"
#include "mixem/types.hpp"

namespace mixem {

// Draws n points from the model: component label by inverse CDF on the mixing
// weights, then center plus unit-covariance Gaussian noise. The same
// (model, n, seed) always reproduces the same points bit for bit.
Dataset sample_dataset(const MixtureModel& model, std::int64_t n, std::uint64_t seed);

// Sampling core reused by Monte Carlo estimators that do not need a Dataset.
// Draws into a preallocated n x d matrix; labels may be null.
void sample_points(const MixtureModel& model, std::mt19937_64& gen, Eigen::MatrixXd& out,
                   std::vector<std::int32_t>* labels = nullptr);

// Vector uniform on the sphere of the given radius.
Eigen::VectorXd sample_sphere(int dim, double radius, std::mt19937_64& gen);

// Vector uniform in the closed ball of the given radius.
Eigen::VectorXd sample_ball(int dim, double radius, std::mt19937_64& gen);

}  // namespace mixem
