#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mixem {

// A set of candidate centers, one row per component. This is the object the
// EM iteration moves around; it carries no mixing weights of its own.
struct CenterSet {
    Eigen::MatrixXd centers;  // M x d

    CenterSet() = default;
    explicit CenterSet(Eigen::MatrixXd c) : centers(std::move(c)) {}

    int components() const { return static_cast<int>(centers.rows()); }
    int dim() const { return static_cast<int>(centers.cols()); }
};

// Isotropic Gaussian mixture with known mixing weights and unit covariance.
class MixtureModel {
  public:
    MixtureModel() = default;
    MixtureModel(Eigen::MatrixXd centers, Eigen::VectorXd weights);

    const Eigen::MatrixXd& centers() const { return centers_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    int components() const { return static_cast<int>(centers_.rows()); }
    int dim() const { return static_cast<int>(centers_.cols()); }

    CenterSet center_set() const { return CenterSet{centers_}; }

    // Stable content hash over (M, d, weights, centers); used to tie datasets
    // back to the model that generated them.
    std::uint64_t digest() const;

  private:
    Eigen::MatrixXd centers_;  // M x d
    Eigen::VectorXd weights_;  // M, positive, sums to 1
};

// Points drawn from a MixtureModel. Labels are kept for diagnostics only;
// the EM routines never see them.
struct Dataset {
    Eigen::MatrixXd points;  // n x d
    std::uint64_t seed = 0;
    std::uint64_t source_model_digest = 0;

    std::int64_t size() const { return points.rows(); }
    int dim() const { return static_cast<int>(points.cols()); }

    const std::vector<std::int32_t>& labels() const { return labels_; }
    std::vector<std::int32_t> labels_;  // diagnostic component indices, may be empty
};

}  // namespace mixem
