#pragma once

#include <cstdint>
#include <string>

#include "mixem/types.hpp"

namespace mixem {

// Geometry summary of a model's centers and weights. m and d ride along so
// every downstream formula is a function of this struct alone. For a single
// component the struct is degenerate: r_min = r_max = 0 and all dependent
// condition flags are reported false.
struct SeparationStats {
    double r_min = 0.0;
    double r_max = 0.0;
    double kappa = 1.0;       // smallest mixing weight
    int effective_dim_2m = 1;  // min(d, 2m)
    int effective_dim_m = 1;   // min(d, m)
    int m = 1;
    int d = 1;
    bool degenerate = true;
};

// Absolute constants of the coarse (constant-form) conditions. They default
// to 1 and are echoed verbatim in every report.
struct TheoryConstants {
    double c0 = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
};

struct SampleSizeCheck {
    bool ok = false;
    double threshold = 0.0;     // admissible ceiling for log(n)/n
    double log_n_over_n = 0.0;
    double c2_tilde = 0.0;      // c2 * log(m (2 r_max + sqrt(d)))
    double c2_tilde_alt = 0.0;  // c2 * log(2 m r_max (2 r_max + sqrt(d))), variant form
    double c3_tilde = 0.0;      // c3 * log(m (3 r_max^2 + d))
};

struct TheoryReport {
    SeparationStats stats;
    TheoryConstants constants;
    std::int64_t n = 0;
    double init_error = 0.0;

    double radius_a = 0.0;  // largest admissible initialization radius (exact form)
    double zeta = 0.0;      // contraction coefficient at radius_a
    bool thm1_separation_ok = false;

    double thm2_radius = 0.0;            // constant-form radius with min(d, m)
    double thm2_radius_proof_dim = 0.0;  // same with min(d, 2m)
    bool thm2_dims_differ = false;
    bool thm2_separation_ok = false;

    SampleSizeCheck sample;
    double plateau = 0.0;  // asymptotic term of the error envelope

    double v_bound_radius = 0.0;       // admissible radius for the V bound
    double weight_mass_radius = 0.0;   // admissible radius for the weight-mass bound
    bool weight_mass_separation_ok = false;

    bool degenerate = false;
};

SeparationStats separation_stats(const MixtureModel& model);

// Largest admissible initialization radius: r_min/2 minus an effective-dim
// margin, max of a log-separation term, 8*sqrt(3), and 8*log(4/kappa).
// May be negative; callers report that as "conditions unsatisfiable".
double contraction_radius(const SeparationStats& stats);

// Contraction coefficient at radius a (requires a < r_min/2), evaluated in
// log space: (3m/kappa^2) (2 r_max + eff)^2 exp(-(r_min/2 - a) sqrt(eff)/8).
double contraction_coefficient(const SeparationStats& stats, double a);

// Separation requirement r_min >= 30 sqrt(min(d, 2m)) for the exact-form
// contraction result.
bool separation_ok(const SeparationStats& stats);

// Constant-form radius r_min/2 - c1 sqrt(eff) sqrt(log(max(m/kappa^2, r_max,
// eff))). The published statement uses eff = min(d, m); its derivation
// produces min(d, 2m); both are exposed and reports flag when they differ.
double constant_radius(const SeparationStats& stats, const TheoryConstants& constants);
double constant_radius_proof_dim(const SeparationStats& stats, const TheoryConstants& constants);
bool constant_separation_ok(const SeparationStats& stats, const TheoryConstants& constants);

// Sample-size condition: log(n)/n <= min(kappa^2 / (144 c2~ m d),
// kappa^2 init_error^2 / (9 c3~ r_max^2 m d)).
SampleSizeCheck sample_size_check(const SeparationStats& stats, double init_error, std::int64_t n,
                                  const TheoryConstants& constants);

// Error envelope after t iterations: init_error / 2^t plus the plateau term
// (3 r_max / kappa) sqrt(c3~ m d log(n) / n).
double error_envelope(int t, double init_error, const SeparationStats& stats, std::int64_t n,
                      const TheoryConstants& constants);
double plateau_term(const SeparationStats& stats, std::int64_t n, const TheoryConstants& constants);

// Tail bound exp(-r sqrt(d) / 2) for the norm of a d-dimensional standard
// Gaussian; only claimed for r >= 2 sqrt(d).
double gaussian_tail_bound(double r, int d);

// Admissible radius for the V-matrix bound: like contraction_radius but
// without the kappa term in the max.
double v_bound_radius(const SeparationStats& stats);

// Upper bound for the V suprema at radius a (requires a < r_min/2):
// (2/kappa) (2 r_max + eff)^2 exp(-(r_min/2 - a) sqrt(eff) / 8).
double v_bound(const SeparationStats& stats, double a);

// Admissible radius for the posterior-mass lower bound; uses min(d, m) and
// the full three-term max. Companion separation check r_min >= 30 sqrt(eff).
double weight_mass_radius(const SeparationStats& stats);
bool weight_mass_separation_ok(const SeparationStats& stats);

TheoryReport theory_report(const MixtureModel& model, double init_error, std::int64_t n,
                           const TheoryConstants& constants);
TheoryReport theory_report(const SeparationStats& stats, double init_error, std::int64_t n,
                           const TheoryConstants& constants);

// Stable JSON round trip: parsing a serialized report and re-deriving from
// its stats block reproduces it bit for bit.
std::string report_to_json(const TheoryReport& report);
TheoryReport report_from_json(const std::string& text);

}  // namespace mixem
