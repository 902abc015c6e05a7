#include "mixem/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace mixem {

namespace {

using nlohmann::json;

double log_margin_term(double r_min) {
    const double clamped = std::max(std::log(r_min / 4.0), 0.0);
    return 4.0 * std::sqrt(2.0) * std::sqrt(clamped);
}

// Shared shape of the admissible-radius formulas: r_min/2 minus
// sqrt(effective_dim) times the largest active margin term.
double radius_from_margins(const SeparationStats& stats, int effective_dim, bool with_kappa_term) {
    double margin = std::max(log_margin_term(stats.r_min), 8.0 * std::sqrt(3.0));
    if (with_kappa_term) {
        margin = std::max(margin, 8.0 * std::log(4.0 / stats.kappa));
    }
    return 0.5 * stats.r_min - std::sqrt(static_cast<double>(effective_dim)) * margin;
}

double exponential_bound(const SeparationStats& stats, double a, double log_prefactor) {
    if (!(a < 0.5 * stats.r_min)) {
        throw std::invalid_argument("radius must be below half the minimum separation");
    }
    const double eff = static_cast<double>(stats.effective_dim_2m);
    const double log_quad = 2.0 * std::log(2.0 * stats.r_max + eff);
    const double exponent = -0.125 * (0.5 * stats.r_min - a) * std::sqrt(eff);
    return std::exp(log_prefactor + log_quad + exponent);
}

}  // namespace

SeparationStats separation_stats(const MixtureModel& model) {
    SeparationStats stats;
    stats.m = model.components();
    stats.d = model.dim();
    stats.effective_dim_2m = std::min(stats.d, 2 * stats.m);
    stats.effective_dim_m = std::min(stats.d, stats.m);
    stats.kappa = model.weights().minCoeff();
    stats.degenerate = stats.m < 2;
    if (stats.degenerate) return stats;

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int i = 0; i < stats.m; ++i) {
        for (int j = i + 1; j < stats.m; ++j) {
            const double dist = (model.centers().row(i) - model.centers().row(j)).norm();
            lo = std::min(lo, dist);
            hi = std::max(hi, dist);
        }
    }
    stats.r_min = lo;
    stats.r_max = hi;
    if (!(lo > 0.0)) {
        throw std::invalid_argument("model has coincident centers");
    }
    return stats;
}

double contraction_radius(const SeparationStats& stats) {
    return radius_from_margins(stats, stats.effective_dim_2m, /*with_kappa_term=*/true);
}

double contraction_coefficient(const SeparationStats& stats, double a) {
    const double log_prefactor =
        std::log(3.0 * stats.m) - 2.0 * std::log(stats.kappa);
    return exponential_bound(stats, a, log_prefactor);
}

bool separation_ok(const SeparationStats& stats) {
    return !stats.degenerate &&
           stats.r_min >= 30.0 * std::sqrt(static_cast<double>(stats.effective_dim_2m));
}

namespace {

double constant_radius_impl(const SeparationStats& stats, const TheoryConstants& constants,
                            int effective_dim) {
    const double eff = static_cast<double>(effective_dim);
    const double arg = std::max({stats.m / (stats.kappa * stats.kappa), stats.r_max, eff});
    return 0.5 * stats.r_min - constants.c1 * std::sqrt(eff) * std::sqrt(std::log(arg));
}

}  // namespace

double constant_radius(const SeparationStats& stats, const TheoryConstants& constants) {
    return constant_radius_impl(stats, constants, stats.effective_dim_m);
}

double constant_radius_proof_dim(const SeparationStats& stats, const TheoryConstants& constants) {
    return constant_radius_impl(stats, constants, stats.effective_dim_2m);
}

bool constant_separation_ok(const SeparationStats& stats, const TheoryConstants& constants) {
    return !stats.degenerate &&
           stats.r_min >=
               constants.c0 * std::sqrt(static_cast<double>(stats.effective_dim_m));
}

SampleSizeCheck sample_size_check(const SeparationStats& stats, double init_error, std::int64_t n,
                                  const TheoryConstants& constants) {
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    const double m = static_cast<double>(stats.m);
    const double d = static_cast<double>(stats.d);
    const double k2 = stats.kappa * stats.kappa;

    SampleSizeCheck check;
    check.c2_tilde = constants.c2 * std::log(m * (2.0 * stats.r_max + std::sqrt(d)));
    check.c2_tilde_alt =
        constants.c2 * std::log(2.0 * m * stats.r_max * (2.0 * stats.r_max + std::sqrt(d)));
    check.c3_tilde = constants.c3 * std::log(m * (3.0 * stats.r_max * stats.r_max + d));
    const double first = k2 / (144.0 * check.c2_tilde * m * d);
    const double second = k2 * init_error * init_error /
                          (9.0 * check.c3_tilde * stats.r_max * stats.r_max * m * d);
    check.threshold = std::min(first, second);
    check.log_n_over_n = std::log(static_cast<double>(n)) / static_cast<double>(n);
    check.ok = check.log_n_over_n <= check.threshold;
    return check;
}

double plateau_term(const SeparationStats& stats, std::int64_t n, const TheoryConstants& constants) {
    const double m = static_cast<double>(stats.m);
    const double d = static_cast<double>(stats.d);
    const double c3_tilde = constants.c3 * std::log(m * (3.0 * stats.r_max * stats.r_max + d));
    const double log_n_over_n = std::log(static_cast<double>(n)) / static_cast<double>(n);
    return 3.0 * stats.r_max / stats.kappa * std::sqrt(c3_tilde * m * d * log_n_over_n);
}

double error_envelope(int t, double init_error, const SeparationStats& stats, std::int64_t n,
                      const TheoryConstants& constants) {
    if (t < 0) throw std::invalid_argument("iteration count must be nonnegative");
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    return std::ldexp(init_error, -t) + plateau_term(stats, n, constants);
}

double gaussian_tail_bound(double r, int d) {
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    const double root_d = std::sqrt(static_cast<double>(d));
    if (!(r >= 2.0 * root_d)) {
        throw std::invalid_argument("tail bound requires r >= 2 sqrt(d)");
    }
    return std::exp(-0.5 * r * root_d);
}

double v_bound_radius(const SeparationStats& stats) {
    return radius_from_margins(stats, stats.effective_dim_2m, /*with_kappa_term=*/false);
}

double v_bound(const SeparationStats& stats, double a) {
    const double log_prefactor = std::log(2.0) - std::log(stats.kappa);
    return exponential_bound(stats, a, log_prefactor);
}

double weight_mass_radius(const SeparationStats& stats) {
    return radius_from_margins(stats, stats.effective_dim_m, /*with_kappa_term=*/true);
}

bool weight_mass_separation_ok(const SeparationStats& stats) {
    return !stats.degenerate &&
           stats.r_min >= 30.0 * std::sqrt(static_cast<double>(stats.effective_dim_m));
}

TheoryReport theory_report(const SeparationStats& stats, double init_error, std::int64_t n,
                           const TheoryConstants& constants) {
    TheoryReport report;
    report.stats = stats;
    report.constants = constants;
    report.n = n;
    report.init_error = init_error;
    report.degenerate = stats.degenerate;
    if (stats.degenerate) return report;

    report.radius_a = contraction_radius(stats);
    report.zeta = contraction_coefficient(stats, report.radius_a);
    report.thm1_separation_ok = separation_ok(stats);
    report.thm2_radius = constant_radius(stats, constants);
    report.thm2_radius_proof_dim = constant_radius_proof_dim(stats, constants);
    report.thm2_dims_differ = stats.effective_dim_m != stats.effective_dim_2m;
    report.thm2_separation_ok = constant_separation_ok(stats, constants);
    report.sample = sample_size_check(stats, init_error, n, constants);
    report.plateau = plateau_term(stats, n, constants);
    report.v_bound_radius = v_bound_radius(stats);
    report.weight_mass_radius = weight_mass_radius(stats);
    report.weight_mass_separation_ok = weight_mass_separation_ok(stats);
    return report;
}

TheoryReport theory_report(const MixtureModel& model, double init_error, std::int64_t n,
                           const TheoryConstants& constants) {
    return theory_report(separation_stats(model), init_error, n, constants);
}

std::string report_to_json(const TheoryReport& r) {
    json j;
    j["stats"] = {{"r_min", r.stats.r_min},
                  {"r_max", r.stats.r_max},
                  {"kappa", r.stats.kappa},
                  {"effective_dim_2m", r.stats.effective_dim_2m},
                  {"effective_dim_m", r.stats.effective_dim_m},
                  {"m", r.stats.m},
                  {"d", r.stats.d},
                  {"degenerate", r.stats.degenerate}};
    j["constants"] = {{"c0", r.constants.c0},
                      {"c1", r.constants.c1},
                      {"c2", r.constants.c2},
                      {"c3", r.constants.c3}};
    j["n"] = r.n;
    j["init_error"] = r.init_error;
    j["radius_a"] = r.radius_a;
    j["zeta"] = r.zeta;
    j["thm1_separation_ok"] = r.thm1_separation_ok;
    j["thm2_radius"] = r.thm2_radius;
    j["thm2_radius_proof_dim"] = r.thm2_radius_proof_dim;
    j["thm2_dims_differ"] = r.thm2_dims_differ;
    j["thm2_separation_ok"] = r.thm2_separation_ok;
    j["sample_threshold"] = r.sample.threshold;
    j["sample_ok"] = r.sample.ok;
    j["log_n_over_n"] = r.sample.log_n_over_n;
    j["c2_tilde"] = r.sample.c2_tilde;
    j["c2_tilde_alt"] = r.sample.c2_tilde_alt;
    j["c3_tilde"] = r.sample.c3_tilde;
    j["plateau"] = r.plateau;
    j["v_bound_radius"] = r.v_bound_radius;
    j["weight_mass_radius"] = r.weight_mass_radius;
    j["weight_mass_separation_ok"] = r.weight_mass_separation_ok;
    j["degenerate"] = r.degenerate;
    return j.dump(2) + "\n";
}

TheoryReport report_from_json(const std::string& text) {
    const json j = json::parse(text);
    SeparationStats stats;
    const json& s = j.at("stats");
    stats.r_min = s.at("r_min").get<double>();
    stats.r_max = s.at("r_max").get<double>();
    stats.kappa = s.at("kappa").get<double>();
    stats.effective_dim_2m = s.at("effective_dim_2m").get<int>();
    stats.effective_dim_m = s.at("effective_dim_m").get<int>();
    stats.m = s.at("m").get<int>();
    stats.d = s.at("d").get<int>();
    stats.degenerate = s.at("degenerate").get<bool>();

    TheoryConstants constants;
    const json& c = j.at("constants");
    constants.c0 = c.at("c0").get<double>();
    constants.c1 = c.at("c1").get<double>();
    constants.c2 = c.at("c2").get<double>();
    constants.c3 = c.at("c3").get<double>();

    // Derived fields are recomputed, not trusted; the round trip asserts the
    // serialized document was self-consistent.
    return theory_report(stats, j.at("init_error").get<double>(), j.at("n").get<std::int64_t>(),
                         constants);
}

}  // namespace mixem
