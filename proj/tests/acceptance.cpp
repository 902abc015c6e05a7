// Acceptance gate: one line per criterion, [PASS]/[FAIL] plus a short
// summary of what was measured. The process exit code is the number of
// unexpected failures; the norm-tail grid check (criterion 9) is a known
// failure at the edge of its validity domain and does not count, provided it
// fails at exactly the known cells.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "mixem/em.hpp"
#include "mixem/experiments.hpp"
#include "mixem/rng.hpp"
#include "mixem/sampling.hpp"
#include "mixem/theory.hpp"
#include "mixem/verify.hpp"
#include "mixem/weights.hpp"

namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

void report(int index, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d. %s — %s\n", pass ? "PASS" : "FAIL", index, name, detail.c_str());
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Eigen::MatrixXd random_centers(int m, int d, std::uint64_t seed) {
    std::mt19937_64 gen{seed};
    std::normal_distribution<double> normal;
    Eigen::MatrixXd c(m, d);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j) c(i, j) = normal(gen);
    }
    return c;
}

mixem::MixtureModel random_separated_model(int m, int d, double r_min, std::uint64_t seed) {
    Eigen::MatrixXd c = random_centers(m, d, seed);
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            dmin = std::min(dmin, (c.row(i) - c.row(j)).norm());
        }
    }
    c *= r_min / dmin;
    std::mt19937_64 gen{seed + 7777};
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) w[i] = unif(gen);
    w /= w.sum();
    return mixem::MixtureModel(std::move(c), std::move(w));
}

mixem::MixtureModel two_cluster_model() {
    Eigen::MatrixXd c(2, 2);
    c << 15.0, 15.0, -15.0, -15.0;
    Eigen::VectorXd w(2);
    w << 0.5, 0.5;
    return mixem::MixtureModel(c, w);
}

// 1. The true centers are numerically stationary under the idealized update.
bool criterion_fixed_point() {
    const auto start = clock_type::now();
    const std::pair<int, int> shapes[] = {{2, 3}, {3, 5}, {4, 7}, {5, 10}, {3, 2}};
    int held = 0;
    double worst_margin = 0.0;
    for (int k = 0; k < 5; ++k) {
        const auto [m, d] = shapes[k];
        const mixem::MixtureModel model =
            random_separated_model(m, d, 12.0, 314 + static_cast<std::uint64_t>(k));
        const double residual = mixem::fixed_point_residual(model, 1000000, 1000 + k);
        const double budget = 5.0 * std::sqrt(static_cast<double>(d) / 1.0e6);
        if (residual <= budget) ++held;
        worst_margin = std::max(worst_margin, residual / budget);
    }
    const double elapsed = seconds_since(start);
    const bool pass = held == 5 && elapsed < 30.0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%d/5 models stationary within 5 standard errors (worst ratio %.2f, %.1fs)",
                  held, worst_margin, elapsed);
    report(1, "idealized update holds the truth fixed", pass, detail);
    return pass;
}

// 2. One idealized step from a displaced start reduces the error.
bool criterion_population_contraction() {
    const mixem::MixtureModel model = two_cluster_model();
    const double radius = 0.25 * 30.0 * std::sqrt(2.0);
    auto gen = mixem::rng::stream(2026, mixem::rng::Purpose::init);
    int reduced = 0;
    for (int t = 0; t < 20; ++t) {
        Eigen::MatrixXd start = model.centers();
        for (int i = 0; i < 2; ++i) {
            start.row(i) += mixem::sample_sphere(2, radius, gen).transpose();
        }
        const mixem::CenterSet iterate{start};
        const double before = mixem::statistical_error(iterate, model);
        const mixem::CenterSet next = mixem::em_step_population(
            model, iterate, 1000000,
            mixem::rng::derive(2026, mixem::rng::Purpose::population_step, t));
        const double after = mixem::statistical_error(next, model);
        if (after < before) ++reduced;
    }
    const bool pass = reduced >= 19;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "%d/20 displaced starts improved after one step",
                  reduced);
    report(2, "idealized step contracts the error", pass, detail);
    return pass;
}

// 3. Default trial batch: early decrease, then a plateau within 8 iterations.
bool criterion_error_curves() {
    const auto start = clock_type::now();
    mixem::ExperimentSpec spec;  // M=5, d=10, scale 2, n=8000, 10 trials
    const std::vector<mixem::TrialResult> results = mixem::run_trials(spec);

    int decreasing = 0;
    std::vector<double> to_plateau;
    for (const mixem::TrialResult& t : results) {
        const auto& e = t.trajectory.stat_errors;
        if (e.size() >= 3 && e[1] < e[0] && e[2] < e[1]) ++decreasing;
        to_plateau.push_back(static_cast<double>(t.iterations_to_plateau));
    }
    const double med = median(to_plateau);
    const double elapsed = seconds_since(start);
    const bool pass = decreasing == static_cast<int>(results.size()) && med <= 8.0 &&
                      elapsed < 60.0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%d/10 curves decrease twice upfront; median settle time %.1f iterations "
                  "(%.1fs)",
                  decreasing, med, elapsed);
    report(3, "error curves settle within eight iterations", pass, detail);
    return pass;
}

// 4. Wider separation converges faster at a fixed early iteration.
bool criterion_separation_sweep() {
    mixem::ExperimentSpec spec;
    const std::vector<double> r_values{1.5, 2.0, 3.0, 4.0};
    const std::vector<mixem::SweepRow> rows = mixem::snr_sweep(spec, r_values);

    std::vector<double> at_three;
    for (const double r : r_values) {
        for (const mixem::SweepRow& row : rows) {
            if (row.r_min == r && row.iteration == 3) at_three.push_back(row.mean_stat_error);
        }
    }
    bool monotone = at_three.size() == r_values.size();
    for (std::size_t i = 1; monotone && i < at_three.size(); ++i) {
        monotone = at_three[i] <= at_three[i - 1];
    }
    std::ostringstream detail;
    detail << "mean error after 3 iterations:";
    for (const double v : at_three) detail << ' ' << std::round(v * 1000.0) / 1000.0;
    report(4, "separation sweep is monotone", monotone, detail.str());
    return monotone;
}

// 5. Quadrupling the sample shrinks the plateau by roughly half.
bool criterion_plateau_scaling() {
    mixem::ExperimentSpec small;
    mixem::ExperimentSpec large;
    large.n = 32000;
    const std::vector<mixem::TrialResult> at_small = mixem::run_trials(small);
    const std::vector<mixem::TrialResult> at_large = mixem::run_trials(large);

    std::vector<double> small_plateaus;
    std::vector<double> large_plateaus;
    for (const auto& t : at_small) small_plateaus.push_back(t.plateau_estimate);
    for (const auto& t : at_large) large_plateaus.push_back(t.plateau_estimate);
    const double ratio = median(small_plateaus) / median(large_plateaus);
    const bool pass = ratio >= 1.6 && ratio <= 2.6;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "median plateau ratio %.3f (want within [1.6, 2.6])",
                  ratio);
    report(5, "plateau scales with the sample size", pass, detail);
    return pass;
}

// 6. Imbalanced mixing weights raise the plateau.
bool criterion_imbalanced_weights() {
    mixem::ExperimentSpec uniform;
    mixem::ExperimentSpec imbalanced;
    imbalanced.weights_kind = mixem::WeightsKind::linear;
    const std::vector<mixem::TrialResult> u = mixem::run_trials(uniform);
    const std::vector<mixem::TrialResult> b = mixem::run_trials(imbalanced);

    int raised = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (b[k].plateau_estimate >= u[k].plateau_estimate) ++raised;
    }
    const bool pass = raised >= 7;
    char detail[120];
    std::snprintf(detail, sizeof(detail),
                  "%d/10 paired trials plateau at least as high with weights i/15", raised);
    report(6, "imbalanced weights hurt the plateau", pass, detail);
    return pass;
}

// 7. Analytic posterior gradient vs central finite differences.
bool criterion_gradient() {
    std::mt19937_64 gen{4242};
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + static_cast<int>(gen() % 4);
        const int m = 2 + static_cast<int>(gen() % 3);
        Eigen::MatrixXd centers(m, d);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < d; ++j) centers(i, j) = 2.0 * normal(gen);
        }
        Eigen::VectorXd weights(m);
        for (int i = 0; i < m; ++i) weights[i] = unif(gen);
        weights /= weights.sum();
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) x[j] = 2.0 * normal(gen);

        const int component = static_cast<int>(gen() % m);
        const mixem::CenterSet iterate{centers};
        const Eigen::MatrixXd analytic =
            mixem::grad_weight(x, iterate, weights, component);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < d; ++j) {
                const double step = 1e-5;
                Eigen::MatrixXd hi = centers;
                Eigen::MatrixXd lo = centers;
                hi(i, j) += step;
                lo(i, j) -= step;
                const double fd =
                    (mixem::posterior_weights(x, mixem::CenterSet{hi}, weights)[component] -
                     mixem::posterior_weights(x, mixem::CenterSet{lo}, weights)[component]) /
                    (2.0 * step);
                const double scale =
                    std::max({1e-3, std::abs(fd), std::abs(analytic(i, j))});
                worst = std::max(worst, std::abs(analytic(i, j) - fd) / scale);
            }
        }
    }
    const bool pass = worst <= 1e-6;
    char detail[120];
    std::snprintf(detail, sizeof(detail),
                  "largest relative gap %.2e over 100 random configurations", worst);
    report(7, "posterior gradient matches finite differences", pass, detail);
    return pass;
}

// 8. Posterior mass lower bound at probed iterates. The closed-form
// admissible radius is negative at this separation (the guarantee is
// vacuous), so probing uses the documented fallback radius r_min / 4.
bool criterion_weight_mass() {
    const mixem::MixtureModel model = two_cluster_model();
    const mixem::SeparationStats stats = mixem::separation_stats(model);
    const double admissible = mixem::weight_mass_radius(stats);
    const double radius = mixem::weight_mass_probe_radius(model);

    int held = 0;
    int total = 0;
    for (int p = 0; p < 10; ++p) {
        auto gen = mixem::rng::stream(2026, mixem::rng::Purpose::init, 1000 + p);
        Eigen::MatrixXd centers = model.centers();
        for (int i = 0; i < 2; ++i) {
            centers.row(i) += mixem::sample_ball(2, radius, gen).transpose();
        }
        const mixem::CenterSet iterate{centers};
        for (int i = 0; i < 2; ++i) {
            const mixem::LemmaCheckResult r = mixem::estimate_weight_mass(
                model, iterate, i, 20000, mixem::rng::derive(2026, mixem::rng::Purpose::probe, p));
            ++total;
            if (r.holds) ++held;
        }
    }
    const bool pass = held == total;
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "%d/%d probes kept three standard errors above (3/4)-kappa "
                  "(admissible radius %.3f is vacuous; probed at fallback %.3f)",
                  held, total, admissible, radius);
    report(8, "posterior mass stays above the floor", pass, detail);
    return pass;
}

// 9. Norm tail bound, zero tolerance on the full grid. Known to fail at the
// edge of its validity domain for d >= 17; those cells are expected.
bool criterion_tail_grid(int& unexpected_failures) {
    const std::set<std::pair<int, int>> known_violations = {
        {17, 2}, {18, 2}, {19, 2}, {20, 2}};
    std::set<std::pair<int, int>> violations;
    std::vector<std::string> lines;
    for (int d = 1; d <= 20; ++d) {
        const double root_d = std::sqrt(static_cast<double>(d));
        for (int k = 2; k <= 4; ++k) {
            const double r = k * root_d;
            const double exact =
                boost::math::gamma_q(0.5 * static_cast<double>(d), 0.5 * r * r);
            const double bound = mixem::gaussian_tail_bound(r, d);
            if (!(exact <= bound)) {
                violations.insert({d, k});
                char line[160];
                std::snprintf(line, sizeof(line),
                              "    violated at d=%d, r=%d*sqrt(d): exact %.6e > bound %.6e",
                              d, k, exact, bound);
                lines.emplace_back(line);
            }
        }
    }
    const bool pass = violations.empty();
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%zu of 60 grid cells violate the bound%s", violations.size(),
                  pass ? "" : " (known: the inequality is false for d >= 17 at r = 2*sqrt(d))");
    report(9, "norm tail bound on the full grid", pass, detail);
    for (const std::string& line : lines) std::printf("%s\n", line.c_str());
    if (!pass && violations != known_violations) {
        std::printf("    UNEXPECTED violation pattern: does not match the known set\n");
        ++unexpected_failures;
    }
    return pass;
}

// 10. Hand-checked one-dimensional update.
bool criterion_hand_step() {
    Eigen::MatrixXd pts(2, 1);
    pts << -2.0, 2.0;
    Eigen::MatrixXd init(2, 1);
    init << -1.0, 1.0;
    Eigen::VectorXd w(2);
    w << 0.5, 0.5;
    const mixem::CenterSet next = mixem::em_step_points(pts, mixem::CenterSet{init}, w);
    const double got = next.centers(0, 0);
    const bool pass = std::abs(got - (-1.92806)) <= 1e-5;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "first center moved to %.7f (want -1.92806 +/- 1e-5)",
                  got);
    report(10, "hand-computed update value", pass, detail);
    return pass;
}

// 11. The figure batch is byte-identical across identical invocations.
bool criterion_determinism() {
    const fs::path base = fs::temp_directory_path() / "mixem_acceptance_fig1";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base / "a");
    fs::create_directories(base / "b");

    const std::string cli = MIXEM_CLI_PATH;
    bool ok = true;
    for (const char* sub : {"a", "b"}) {
        const std::string cmd = cli + " --seed 99 --threads 1 --out " +
                                (base / sub).string() + " fig1 > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        ok = ok && rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
    }
    auto read_all = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    bool identical = ok;
    for (const char* name : {"fig1_trials.csv", "fig1_summary.json"}) {
        identical = identical && !read_all(base / "a" / name).empty() &&
                    read_all(base / "a" / name) == read_all(base / "b" / name);
    }
    report(11, "figure batch is byte-identical across runs", identical,
           ok ? "two seeded runs compared file by file"
              : "running the command-line tool failed");
    return identical;
}

}  // namespace

int main() {
    int failures = 0;
    int passed = 0;
    const auto tally = [&](bool pass) {
        if (pass) {
            ++passed;
        } else {
            ++failures;
        }
    };

    tally(criterion_fixed_point());
    tally(criterion_population_contraction());
    tally(criterion_error_curves());
    tally(criterion_separation_sweep());
    tally(criterion_plateau_scaling());
    tally(criterion_imbalanced_weights());
    tally(criterion_gradient());
    tally(criterion_weight_mass());

    int unexpected_from_grid = 0;
    if (criterion_tail_grid(unexpected_from_grid)) ++passed;
    failures += unexpected_from_grid;  // expected-red unless the pattern changed

    tally(criterion_hand_step());
    tally(criterion_determinism());

    std::printf("%d of 11 criteria passed; %d unexpected failure%s\n", passed, failures,
                failures == 1 ? "" : "s");
    return failures;
}
