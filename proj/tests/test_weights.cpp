#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mixem/types.hpp"
#include "mixem/weights.hpp"
#include "oracles.hpp"

using mixem::CenterSet;
using mixem::MixtureModel;

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;

MixtureModel two_component_line(double left, double right) {
    Eigen::MatrixXd c(2, 1);
    c << left, right;
    Eigen::VectorXd w(2);
    w << 0.5, 0.5;
    return MixtureModel(c, w);
}

}  // namespace

TEST_CASE("log density: single standard component at its mode") {
    Eigen::MatrixXd c(1, 1);
    c << 0.0;
    Eigen::VectorXd w(1);
    w << 1.0;
    const MixtureModel model(c, w);
    Eigen::VectorXd x(1);
    x << 0.0;
    CHECK(mixem::log_density(x, model) == doctest::Approx(-kHalfLogTwoPi).epsilon(1e-14));
}

TEST_CASE("log density: symmetric pair collapses to a single Gaussian factor") {
    const MixtureModel model = two_component_line(-3.0, 3.0);
    Eigen::VectorXd x(1);
    x << 0.0;
    // log(0.5 phi(3) + 0.5 phi(3)) = log phi(3)
    const double expected = -kHalfLogTwoPi - 4.5;
    CHECK(mixem::log_density(x, model) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("log density: asymmetric two-component scalar evaluation") {
    const MixtureModel model = [] {
        Eigen::MatrixXd c(2, 1);
        c << 0.0, 4.0;
        Eigen::VectorXd w(2);
        w << 0.5, 0.5;
        return MixtureModel(c, w);
    }();
    Eigen::VectorXd x(1);
    x << 1.0;
    const double expected =
        std::log(0.5 * std::exp(-0.5) / std::sqrt(2.0 * M_PI) +
                 0.5 * std::exp(-4.5) / std::sqrt(2.0 * M_PI));
    CHECK(mixem::log_density(x, model) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(expected == doctest::Approx(-2.093935785846808).epsilon(1e-12));
}

TEST_CASE("log density: dimension mismatch is rejected") {
    const MixtureModel model = two_component_line(-1.0, 1.0);
    Eigen::VectorXd x(2);
    x << 0.0, 0.0;
    CHECK_THROWS_AS((void)mixem::log_density(x, model), std::invalid_argument);
}

TEST_CASE("posterior weights: single component is identically one") {
    Eigen::MatrixXd c(1, 3);
    c << 1.0, 2.0, 3.0;
    Eigen::VectorXd w(1);
    w << 1.0;
    Eigen::VectorXd x(3);
    x << -5.0, 0.0, 5.0;
    const Eigen::VectorXd p = mixem::posterior_weights(x, CenterSet{c}, w);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == 1.0);
}

TEST_CASE("posterior weights: equidistant point splits evenly") {
    const MixtureModel model = two_component_line(-2.0, 2.0);
    Eigen::VectorXd x(1);
    x << 0.0;
    const Eigen::VectorXd p =
        mixem::posterior_weights(x, model.center_set(), model.weights());
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("posterior weights: two-component log odds") {
    const MixtureModel model = [] {
        Eigen::MatrixXd c(2, 1);
        c << 0.0, 4.0;
        Eigen::VectorXd w(2);
        w << 0.5, 0.5;
        return MixtureModel(c, w);
    }();
    Eigen::VectorXd x(1);
    x << 0.0;
    const Eigen::VectorXd p =
        mixem::posterior_weights(x, model.center_set(), model.weights());
    // odds = exp((|x-mu2|^2 - |x-mu1|^2)/2) = exp(8)
    CHECK(p[0] == doctest::Approx(1.0 / (1.0 + std::exp(-8.0))).epsilon(1e-14));
    CHECK(p[0] == doctest::Approx(0.9996646498695336).epsilon(1e-12));
}

TEST_CASE("posterior weights: normalized and in range for extreme inputs") {
    Eigen::MatrixXd c(3, 2);
    c << 0.0, 0.0, 40.0, 0.0, 0.0, 40.0;
    Eigen::VectorXd w(3);
    w << 0.2, 0.3, 0.5;
    std::mt19937_64 gen{12345};
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (double scale : {1.0, 1e2, 1e4, 1e6}) {
        for (int rep = 0; rep < 25; ++rep) {
            Eigen::VectorXd x(2);
            x << scale * unif(gen), scale * unif(gen);
            const Eigen::VectorXd p = mixem::posterior_weights(x, CenterSet{c}, w);
            CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
            CHECK(p.minCoeff() >= 0.0);
            CHECK(p.maxCoeff() <= 1.0);
            CHECK(p.allFinite());
        }
    }
}

TEST_CASE("posterior weights: permutation equivariance is exact") {
    Eigen::MatrixXd c(3, 2);
    c << 1.0, 0.0, -2.0, 3.0, 0.5, -1.0;
    Eigen::VectorXd w(3);
    w << 0.2, 0.3, 0.5;
    Eigen::VectorXd x(2);
    x << 0.7, -0.3;
    const Eigen::VectorXd p = mixem::posterior_weights(x, CenterSet{c}, w);

    const int perm[3] = {2, 0, 1};
    Eigen::MatrixXd cp(3, 2);
    Eigen::VectorXd wp(3);
    for (int i = 0; i < 3; ++i) {
        cp.row(i) = c.row(perm[i]);
        wp[i] = w[perm[i]];
    }
    const Eigen::VectorXd pp = mixem::posterior_weights(x, CenterSet{cp}, wp);
    for (int i = 0; i < 3; ++i) CHECK(pp[i] == p[perm[i]]);
}

TEST_CASE("posterior weights: translation equivariance") {
    Eigen::MatrixXd c(2, 3);
    c << 1.0, 0.0, 2.0, -1.0, 3.0, 0.0;
    Eigen::VectorXd w(2);
    w << 0.4, 0.6;
    Eigen::VectorXd x(3);
    x << 0.3, -0.8, 1.1;
    Eigen::VectorXd v(3);
    v << 17.0, -4.0, 2.5;
    const Eigen::VectorXd base = mixem::posterior_weights(x, CenterSet{c}, w);
    const Eigen::VectorXd shifted = mixem::posterior_weights(
        Eigen::VectorXd(x + v), CenterSet{Eigen::MatrixXd(c.rowwise() + v.transpose())}, w);
    CHECK((base - shifted).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("gradient: single component gradient vanishes") {
    Eigen::MatrixXd c(1, 2);
    c << 1.0, -1.0;
    Eigen::VectorXd w(1);
    w << 1.0;
    Eigen::VectorXd x(2);
    x << 0.2, 0.4;
    const Eigen::MatrixXd g = mixem::grad_weight(x, CenterSet{c}, w, 0);
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient: symmetric two-component blocks have equal norms") {
    const MixtureModel model = two_component_line(-2.0, 2.0);
    Eigen::VectorXd x(1);
    x << 0.0;
    const Eigen::MatrixXd g =
        mixem::grad_weight(x, model.center_set(), model.weights(), 0);
    CHECK(g.row(0).norm() == doctest::Approx(g.row(1).norm()).epsilon(1e-13));
}

TEST_CASE("gradient: matches central finite differences on random configurations") {
    std::mt19937_64 gen{777};
    std::uniform_int_distribution<int> dim_dist(1, 5);
    std::uniform_int_distribution<int> comp_dist(2, 4);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.5, 1.5);

    int checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const int d = dim_dist(gen);
        const int m = comp_dist(gen);
        Eigen::MatrixXd c(m, d);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < d; ++j) c(i, j) = 2.0 * normal(gen);
        }
        Eigen::VectorXd w(m);
        for (int i = 0; i < m; ++i) w[i] = unif(gen);
        w /= w.sum();
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) x[j] = 2.0 * normal(gen);
        const int target = std::uniform_int_distribution<int>(0, m - 1)(gen);

        const Eigen::MatrixXd g = mixem::grad_weight(x, CenterSet{c}, w, target);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < d; ++j) {
                auto f = [&](const Eigen::VectorXd& flat) {
                    Eigen::MatrixXd cc = c;
                    cc(i, j) = flat[0];
                    return mixem::posterior_weights(x, CenterSet{cc}, w)[target];
                };
                Eigen::VectorXd at(1);
                at << c(i, j);
                const double fd = oracles::central_diff(f, at, 0);
                const double scale = std::max({1e-3, std::abs(fd), std::abs(g(i, j))});
                CHECK(std::abs(g(i, j) - fd) / scale <= 1e-6);
                ++checked;
            }
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("gradient: directional derivative agrees with finite differences") {
    std::mt19937_64 gen{31};
    std::normal_distribution<double> normal;
    const int m = 3;
    const int d = 2;
    Eigen::MatrixXd c(m, d);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j) c(i, j) = normal(gen);
    }
    Eigen::VectorXd w(m);
    w << 0.25, 0.35, 0.4;
    Eigen::VectorXd x(d);
    x << 0.3, -0.6;
    Eigen::MatrixXd u(m, d);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j) u(i, j) = normal(gen);
    }
    u /= u.norm();

    const Eigen::MatrixXd g = mixem::grad_weight(x, CenterSet{c}, w, 1);
    const double analytic = (g.array() * u.array()).sum();
    const double step = 1e-5;
    const double plus =
        mixem::posterior_weights(x, CenterSet{Eigen::MatrixXd(c + step * u)}, w)[1];
    const double minus =
        mixem::posterior_weights(x, CenterSet{Eigen::MatrixXd(c - step * u)}, w)[1];
    const double fd = (plus - minus) / (2.0 * step);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("gradient: component index is validated") {
    const MixtureModel model = two_component_line(-1.0, 1.0);
    Eigen::VectorXd x(1);
    x << 0.0;
    CHECK_THROWS_AS((void)mixem::grad_weight(x, model.center_set(), model.weights(), 2),
                    std::out_of_range);
    CHECK_THROWS_AS((void)mixem::grad_weight(x, model.center_set(), model.weights(), -1),
                    std::out_of_range);
}

TEST_CASE("responsibilities: rows match per-point posterior weights") {
    Eigen::MatrixXd c(3, 2);
    c << 0.0, 0.0, 4.0, 1.0, -2.0, 3.0;
    Eigen::VectorXd w(3);
    w << 0.5, 0.2, 0.3;
    std::mt19937_64 gen{99};
    std::normal_distribution<double> normal;
    Eigen::MatrixXd pts(40, 2);
    for (int i = 0; i < pts.rows(); ++i) {
        pts(i, 0) = 3.0 * normal(gen);
        pts(i, 1) = 3.0 * normal(gen);
    }
    const Eigen::MatrixXd r = mixem::responsibilities(pts, CenterSet{c}, w);
    REQUIRE(r.rows() == pts.rows());
    REQUIRE(r.cols() == 3);
    for (int i = 0; i < pts.rows(); ++i) {
        const Eigen::VectorXd p =
            mixem::posterior_weights(pts.row(i).transpose(), CenterSet{c}, w);
        CHECK((r.row(i).transpose() - p).cwiseAbs().maxCoeff() <= 1e-12);
    }
}
