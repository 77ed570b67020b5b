#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pathcalc/functional.hpp"
#include "pathcalc/grid.hpp"
#include "pathcalc/localtime.hpp"
#include "pathcalc/simulate.hpp"

namespace pathcalc {

struct Term {
    std::string name;
    double value = 0.0;
};

/// One identity, both sides, and the named pieces the right side is built
/// from. rhs is always the in-order sum of `terms` and residual is always
/// lhs - rhs, so the serialized numbers recompose exactly.
struct VerificationReport {
    std::string identity;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    std::vector<Term> terms;
    std::vector<Term> extras;  // diagnostics outside the identity algebra
    std::vector<std::pair<double, double>> compensator;  // (t, A_t)
    struct Row {
        std::string label;
        std::vector<Term> cells;
    };
    std::vector<Row> rows;
    std::vector<std::string> notes;
    bool pass = true;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

/// Sums terms into rhs and sets residual = lhs - rhs.
void finalize_terms(VerificationReport& report);

struct EnsembleStats {
    double mean = 0.0;
    double se = 0.0;
    double rms = 0.0;
    std::int64_t n = 0;
};
EnsembleStats collect_stats(std::span<const double> xs);

/// Simulates members with derived seeds, applies per_path, reduces in index
/// order regardless of thread count.
std::vector<double> ensemble_values(const SimSpec& spec, std::int64_t n_paths, int threads,
                                    const std::function<double(const Path&)>& per_path);

/// Default band/level schedule: eps = max(0.02, 0.6 * N^(-1/4)), dy = eps/2.
double default_eps(std::int64_t steps);

/// f(X_t) against f(X_0) + time integral + Ito integral + half the
/// second-derivative sum. Needs the dt/dx/dxx traces; throws
/// std::invalid_argument for functionals without them.
VerificationReport check_functional_ito(const Functional& f, const Path& y);

/// |x_t - K| against |x_0 - K| + left-sign Ito integral + 2 L(t, K).
VerificationReport check_classical_tanaka(double strike, const Path& y, double eps,
                                          Convention conv = Convention::quarter,
                                          BandPoint point = BandPoint::left);

/// Running max increment against the level-zero local time of x minus its
/// running max; the report carries both convention constants' values.
VerificationReport check_levy_max(const Path& y, double eps, Convention conv);

/// Mirror identity through the running minimum.
VerificationReport check_levy_min(const Path& y, double eps, Convention conv);

struct MeyerTanakaOptions {
    double eps = 0.02;
    double dy = 0.01;
    Convention conv = Convention::quarter;
    /// Level-lattice alignment point; defaults to 0.
    double anchor = 0.0;
    /// Assemble the shifted variant on x minus its running max (only the
    /// running_max functional supports it; the section derivative becomes
    /// the unit step at zero).
    bool shift_by_running_max = false;
    /// Checkpoints in the compensator trace.
    int compensator_points = 65;
};

/// Full assembly: f(X_t) = f(X_0) + time term + left-derivative Ito term
/// + final-time Stieltjes term - double Stieltjes correction. Only
/// convex-flagged functionals with analytic sections are accepted.
VerificationReport check_meyer_tanaka(const Functional& f, const Path& y,
                                      const MeyerTanakaOptions& opts);

/// The running-integral occupation identity in its summation-by-parts form
/// (exact) with the local-time form attached as a diagnostic.
VerificationReport check_occupation_running_integral(const Path& y, double eps, double dy);

struct OccupationParams {
    double eps = 0.02;
    double dy = 0.01;
    Convention conv = Convention::quarter;
    /// Indicator window for the 1_{[a,b]} member, relative to x_0.
    double window_lo = -0.2931;
    double window_hi = 0.6853;
};

/// Occupation identity for the test family {1, y, y^2, 1_[a,b], s*y}; one
/// report per member, lhs the increment sum, rhs the local-time form.
std::vector<VerificationReport> check_occupation_family(const Path& y, const OccupationParams& params);

/// Monte Carlo drift of H(x_t, max_t) at the checkpoints; pass means every
/// checkpoint mean is within 3 SE of H(0,0).
VerificationReport check_max_martingale(const PsiSpec& psi, double h0, const SimSpec& spec,
                                        std::int64_t n_paths, std::span<const double> checkpoints,
                                        int threads = 0);

struct ProbeGrid {
    double lo1 = -2.0, hi1 = 2.0;
    double lo2 = 0.0, hi2 = 2.0;
    int points = 21;
};

/// Central-difference check of the two defining conditions on H: the mixed
/// second derivative in the first slot vanishes, and the second-slot
/// derivative vanishes on the diagonal.
VerificationReport check_condition_h(const std::function<double(double, double)>& h,
                                     const ProbeGrid& grid);

/// Left space-derivative estimate of a max-martingale functional; the
/// characterization says it recovers psi at the running max.
double recover_psi(const Functional& f, const Path& y);

/// Lattice statistic sum_j sum_k d_y g * dL with g the section derivative;
/// zero (within lattice tolerance) characterizes local martingales among
/// functionals with no time derivative.
VerificationReport check_local_martingale_condition(const Functional& f, const Path& y,
                                                    double eps, double dy, Convention conv);

/// The running max as an increasing functional: its Ito integrand vanishes
/// identically and the rest of the assembly is the Levy identity.
VerificationReport check_increasing_functional(const Path& y, double eps, Convention conv);

/// Compensator trace A_t = 2 (f(X_t) - f(X_0) - time term - Ito term)
/// sampled at evenly spread checkpoints.
std::vector<std::pair<double, double>> compensator_trace(const Functional& f, const Path& y,
                                                         int points);

}  // namespace pathcalc
