#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathcalc/grid.hpp"

namespace pathcalc {

/// Derivative of y -> f(path with last value y) taken from the left, bound
/// to one path; the index j selects the prefix ending at t_j.
using SectionDerivative = std::function<double(std::int64_t j, double y)>;

/// A real functional of paths plus whatever analytic structure it carries.
///
/// Point derivatives (dt, dx, dx_left, dx_right, dxx) act at the end of the
/// given path and follow the discrete reading: the pre-limit value y_{t-} is
/// the previous grid point. Traces (dt_trace, ...) return one value per
/// prefix X_0..X_k and follow the continuous-path reading y_{t-} = y_t; the
/// identity assemblies consume traces so estimator error never enters them.
struct Functional {
    std::string name;
    bool convex = false;

    std::function<double(const Path&)> evaluate;

    std::function<double(const Path&)> dt;
    std::function<double(const Path&)> dx;
    std::function<double(const Path&)> dx_left;
    std::function<double(const Path&)> dx_right;
    std::function<double(const Path&)> dxx;

    std::function<std::vector<double>(const Path&)> dt_trace;
    std::function<std::vector<double>(const Path&)> dx_trace;
    std::function<std::vector<double>(const Path&)> dx_left_trace;
    std::function<std::vector<double>(const Path&)> dxx_trace;

    /// Left derivative in y of the last-value section, on any prefix.
    std::function<SectionDerivative(const Path&)> make_section_dleft;
};

/// f(bump(Y, h)).
double eval_bumped(const Functional& f, const Path& y, double h);

/// f(replace_last(Y, v)).
double eval_replaced(const Functional& f, const Path& y, double v);

struct DerivativeEstimate {
    double value = 0.0;
    std::vector<double> steps;
    double residual = 0.0;
    bool diverged = false;
};

enum class Side { left, right, central };

/// Forward quotients (f(extend to t+d) - f(Y))/d over a decreasing step
/// sequence, extrapolated to d -> 0. Defaults: d_k = 32*dt / 2^k, six
/// levels, clipped to the horizon. Throws std::domain_error when no step
/// fits before the horizon.
DerivativeEstimate time_derivative_est(const Functional& f, const Path& y,
                                       std::vector<double> deltas = {});

/// One-sided or central difference quotients of h -> f(bump(Y,h)),
/// extrapolated to h -> 0. Defaults: h_k = 1e-2 / 2^k, six levels. At a
/// kink the central variant settles on the average of the one-sided limits.
DerivativeEstimate space_derivative_est(const Functional& f, const Path& y, Side side,
                                        std::vector<double> steps = {});

/// Central second differences of h -> f(bump(Y,h)), extrapolated in h^2.
DerivativeEstimate second_space_derivative_est(const Functional& f, const Path& y,
                                               std::vector<double> steps = {});

/// Max of |f(bump(Y,xi)) - f(bump(Z,xi))| over sampled perturbations Z with
/// distance(Y, Z) <= radius and xi in [-3, 3]. A continuity-modulus probe,
/// nothing stronger.
double continuity_probe(const Functional& f, const Path& y, double radius,
                        std::int64_t samples, std::uint64_t seed);

// Built-in functionals.
Functional running_max();
Functional running_min();
Functional running_integral();          // left Riemann sum of the values
Functional quadratic_variation();       // sum of squared increments
Functional terminal_value();
Functional abs_terminal_minus(double strike);

/// f(Y) = h(t, y_t) for a smooth h(t, y) with supplied partials.
Functional path_independent(std::string name, std::function<double(double, double)> h,
                            std::function<double(double, double)> h_t,
                            std::function<double(double, double)> h_y,
                            std::function<double(double, double)> h_yy, bool convex = false);

/// Member of the closed-form psi catalogue: psi, psi', and its
/// antiderivative from 0.
struct PsiSpec {
    std::string name;
    std::function<double(double)> psi;
    std::function<double(double)> dpsi;
    std::function<double(double)> integral;
};

/// Catalogue lookup by name: "one", "id", "square", "exp_neg".
/// Unknown names throw std::invalid_argument.
PsiSpec psi_catalogue(const std::string& name);

/// H(x1, x2) = int_0^{x2} psi - psi(x2)*(x2 - x1) + h0.
double psi_h(const PsiSpec& spec, double x1, double x2, double h0);

/// f(Y) = H(y_t, running max of Y) for catalogue psi.
Functional max_martingale_functional(const PsiSpec& spec, double h0);

/// Running maxima of every prefix: out[j] = max(values[0..j]).
std::vector<double> prefix_max(const Path& y);
std::vector<double> prefix_min(const Path& y);

}  // namespace pathcalc
