#include "mixem/sampling.hpp"

#include <bit>
#include <cmath>

namespace mixem {

namespace {

std::uint64_t fnv1a_mix(std::uint64_t h, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffULL;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a_mix(std::uint64_t h, double v) {
    return fnv1a_mix(h, std::bit_cast<std::uint64_t>(v));
}

}  // namespace

MixtureModel::MixtureModel(Eigen::MatrixXd centers, Eigen::VectorXd weights)
    : centers_(std::move(centers)), weights_(std::move(weights)) {
    if (centers_.rows() < 1 || centers_.cols() < 1) {
        throw std::invalid_argument("model needs at least one component and one dimension");
    }
    if (weights_.size() != centers_.rows()) {
        throw std::invalid_argument("weight count does not match component count");
    }
    if (!centers_.allFinite() || !weights_.allFinite()) {
        throw std::invalid_argument("model parameters must be finite");
    }
    if (!(weights_.minCoeff() > 0.0)) {
        throw std::invalid_argument("mixing weights must be strictly positive");
    }
    if (std::abs(weights_.sum() - 1.0) > 1e-12) {
        throw std::invalid_argument("mixing weights must sum to 1");
    }
}

std::uint64_t MixtureModel::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a_mix(h, static_cast<std::uint64_t>(components()));
    h = fnv1a_mix(h, static_cast<std::uint64_t>(dim()));
    for (Eigen::Index i = 0; i < weights_.size(); ++i) h = fnv1a_mix(h, weights_[i]);
    for (Eigen::Index i = 0; i < centers_.rows(); ++i)
        for (Eigen::Index j = 0; j < centers_.cols(); ++j) h = fnv1a_mix(h, centers_(i, j));
    return h;
}

void sample_points(const MixtureModel& model, std::mt19937_64& gen, Eigen::MatrixXd& out,
                   std::vector<std::int32_t>* labels) {
    const int d = model.dim();
    const int m = model.components();
    Eigen::VectorXd cumulative(m);
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        acc += model.weights()[j];
        cumulative[j] = acc;
    }
    cumulative[m - 1] = 1.0;

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    if (labels) labels->resize(static_cast<std::size_t>(out.rows()));
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double u = unif(gen);
        int label = 0;
        while (label < m - 1 && u > cumulative[label]) ++label;
        for (int k = 0; k < d; ++k) out(i, k) = model.centers()(label, k) + normal(gen);
        if (labels) (*labels)[static_cast<std::size_t>(i)] = label;
    }
}

Dataset sample_dataset(const MixtureModel& model, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("dataset size must be positive");
    Dataset data;
    data.points.resize(n, model.dim());
    data.seed = seed;
    data.source_model_digest = model.digest();
    auto gen = rng::stream(seed, rng::Purpose::data);
    sample_points(model, gen, data.points, &data.labels_);
    return data;
}

Eigen::VectorXd sample_sphere(int dim, double radius, std::mt19937_64& gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(dim);
    double norm2 = 0.0;
    do {
        for (int k = 0; k < dim; ++k) v[k] = normal(gen);
        norm2 = v.squaredNorm();
    } while (norm2 == 0.0);
    return v * (radius / std::sqrt(norm2));
}

Eigen::VectorXd sample_ball(int dim, double radius, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd v = sample_sphere(dim, radius, gen);
    return v * std::pow(unif(gen), 1.0 / dim);
}

}  // namespace mixem
