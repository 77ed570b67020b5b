#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pathcalc/gauss.hpp"
#include "pathcalc/grid.hpp"
#include "pathcalc/mollify.hpp"
#include "pathcalc/rng.hpp"

using namespace pathcalc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Path make_path(double horizon, std::vector<double> values) {
    auto n = static_cast<std::int64_t>(values.size()) - 1;
    return Path(TimeGrid(horizon, n), std::move(values));
}

// Moments of the kernel under the same 64-node rule the class integrates
// with; the class reproduces these, not the infinite-precision integrals.
constexpr double kAbsMoment = 0.33461790644967215;
constexpr double kHalfMoment = 0.16730895322483607;

}  // namespace

TEST_CASE("gauss legendre rules") {
    const GaussLegendre& two = gauss_legendre(2);
    REQUIRE_THAT(two.nodes[0], WithinAbs(-1.0 / std::sqrt(3.0), 1e-15));
    REQUIRE_THAT(two.nodes[1], WithinAbs(1.0 / std::sqrt(3.0), 1e-15));
    REQUIRE_THAT(two.weights[0], WithinAbs(1.0, 1e-15));

    // order n is exact through degree 2n-1
    const GaussLegendre& five = gauss_legendre(5);
    double int_x8 = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < five.nodes.size(); ++i) {
        int_x8 += five.weights[i] * std::pow(five.nodes[i], 8);
        wsum += five.weights[i];
    }
    REQUIRE_THAT(int_x8, WithinAbs(2.0 / 9.0, 1e-14));
    REQUIRE_THAT(wsum, WithinAbs(2.0, 1e-14));

    REQUIRE_THROWS_AS(gauss_legendre(1), std::invalid_argument);
    REQUIRE(&gauss_legendre(64) == &gauss_legendre(64));
}

TEST_CASE("kernel shape") {
    Mollifier rho;
    REQUIRE_THAT(rho(0.0), WithinRel(Mollifier::kNorm * std::exp(-1.0), 1e-15));
    REQUIRE(rho(1.0) == 0.0);
    REQUIRE(rho(-1.0) == 0.0);
    REQUIRE(rho(1.5) == 0.0);
    REQUIRE(rho.eval(1, -1.2) == 0.0);
    REQUIRE(rho.eval(2, 2.0) == 0.0);

    for (double x : {0.1, 0.35, 0.62, 0.9}) {
        REQUIRE(rho(x) == rho(-x));
        REQUIRE(rho.eval(1, x) == -rho.eval(1, -x));
        REQUIRE(rho.eval(2, x) == rho.eval(2, -x));
    }
    REQUIRE(rho.eval(1, 0.0) == 0.0);
    REQUIRE(rho(0.999999) < 1e-200);

    REQUIRE_THROWS_AS(rho.eval(3, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(rho.eval(-1, 0.0), std::invalid_argument);
}

TEST_CASE("kernel integrates to one") {
    // composite rule: panel count beats the single-panel quadrature error
    const GaussLegendre& rule = gauss_legendre(32);
    Mollifier rho;
    const int panels = 8;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        double a = -1.0 + 2.0 * p / panels;
        double b = a + 2.0 / panels;
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += half * rule.weights[i] * rho(mid + half * rule.nodes[i]);
    }
    REQUIRE_THAT(acc, WithinAbs(1.0, 1e-10));
}

TEST_CASE("kernel derivatives match finite differences") {
    Mollifier rho;
    for (double x : {-0.7, -0.3, 0.05, 0.4, 0.8}) {
        double h = 1e-6;
        double fd1 = (rho(x + h) - rho(x - h)) / (2.0 * h);
        REQUIRE_THAT(rho.eval(1, x), WithinAbs(fd1, 2e-6));
        double fd2 = (rho.eval(1, x + h) - rho.eval(1, x - h)) / (2.0 * h);
        REQUIRE_THAT(rho.eval(2, x), WithinAbs(fd2, 2e-5));
    }
}

TEST_CASE("mollified derivatives match finite differences of the smooth profile") {
    // smooth base: integration by parts onto the kernel is exact up to the
    // (tiny) quadrature error, so the two derivative routes must agree
    auto cubic = path_independent(
        "cubic_terminal", [](double, double v) { return v * v * v; },
        [](double, double) { return 0.0; }, [](double, double v) { return 3.0 * v * v; },
        [](double, double v) { return 6.0 * v; });
    MollifiedFunctional fn(cubic, 4);
    Path y = make_path(1.0, {0.3, -0.1, 0.4});
    for (double h : {0.0, 0.05, -0.11}) {
        double step = 1e-5;
        double fd1 = (fn.eval_bumped(y, h + step) - fn.eval_bumped(y, h - step)) / (2.0 * step);
        REQUIRE_THAT(fn.deriv(1, y, h), WithinAbs(fd1, 1e-6));
        double fd2 = (fn.eval_bumped(y, h + step) - 2.0 * fn.eval_bumped(y, h) +
                      fn.eval_bumped(y, h - step)) /
                     (step * step);
        REQUIRE_THAT(fn.deriv(2, y, h), WithinAbs(fd2, 1e-4));
    }
    REQUIRE_THROWS_AS(fn.deriv(3, y, 0.0), std::invalid_argument);

    // kinked base with the kink outside every probed window: the profile is
    // locally linear, both routes see slope 1
    MollifiedFunctional fa(abs_terminal_minus(0.0), 4);
    Path clear = make_path(1.0, {0.3, -0.1, 0.5});
    for (double h : {0.0, 0.1, -0.1}) {
        double step = 1e-5;
        double fd1 = (fa.eval_bumped(clear, h + step) - fa.eval_bumped(clear, h - step)) /
                     (2.0 * step);
        REQUIRE_THAT(fa.deriv(1, clear, h), WithinAbs(fd1, 1e-6));
        REQUIRE_THAT(fa.deriv(1, clear, h), WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("linear functionals are fixed points of mollification") {
    Path y = make_path(1.0, {0.0, -0.4, 0.9});
    // the value inherits the kernel's single-panel normalization error,
    // about 2e-12 relative
    for (std::int64_t n : {1LL, 2LL, 16LL, 256LL}) {
        MollifiedFunctional fn(terminal_value(), n);
        REQUIRE_THAT(fn.value(y), WithinAbs(y.last(), 1e-11));
        REQUIRE_THAT(fn.deriv(1, y, 0.0), WithinAbs(1.0, 1e-8));
    }
    // the kernel-second-derivative route amplifies quadrature error by n^2,
    // so the vanishing curvature of a linear base is only visible at small n
    REQUIRE_THAT(MollifiedFunctional(terminal_value(), 1).deriv(2, y, 0.0),
                 WithinAbs(0.0, 1e-6));
}

TEST_CASE("abs at the kink smooths by the fixed kernel moment") {
    Functional f = abs_terminal_minus(0.25);
    Path y = make_path(1.0, {0.3, -0.1, 0.25});
    REQUIRE(f.evaluate(y) == 0.0);
    for (std::int64_t n : {2LL, 8LL, 64LL, 256LL}) {
        MollifiedFunctional fn(f, n);
        REQUIRE_THAT(fn.value(y) * static_cast<double>(n), WithinAbs(kAbsMoment, 1e-10));
        REQUIRE_THAT(fn.deriv(1, y, 0.0), WithinAbs(0.0, 1e-10));
    }
}

TEST_CASE("running max at its own maximum smooths to the half moment") {
    Functional f = running_max();
    // the max is also attained before the end, so the bump profile kinks at 0
    Path y = make_path(1.0, {0.1, 0.5, 0.5});
    REQUIRE(f.evaluate(y) == 0.5);
    for (std::int64_t n : {2LL, 16LL, 128LL}) {
        MollifiedFunctional fn(f, n);
        REQUIRE_THAT((fn.value(y) - 0.5) * static_cast<double>(n), WithinAbs(kHalfMoment, 1e-8));
        // the smoothed slope splits the 0/1 kink evenly
        REQUIRE_THAT(fn.deriv(1, y, 0.0), WithinAbs(0.5, 1e-8));
    }
}

TEST_CASE("bump composition commutes with mollification") {
    MollifiedFunctional fn(running_max(), 8);
    Path y = make_path(1.0, {0.1, -0.2, 0.5});
    for (double z : {-0.3, 0.2}) {
        for (double h : {-0.15, 0.4}) {
            REQUIRE_THAT(fn.eval_bumped(bump(y, z), h), WithinAbs(fn.eval_bumped(y, z + h), 1e-12));
        }
    }
}

TEST_CASE("convergence report on the kink instance") {
    Path y = make_path(1.0, {0.3, -0.1, 0.25});
    std::vector<std::int64_t> ns{2, 4, 8, 16, 32, 64, 128, 256};
    ConvergenceReport rep = convergence_report(abs_terminal_minus(0.25), y, ns);
    REQUIRE(rep.rows.size() == ns.size());
    REQUIRE(rep.f_exact == 0.0);
    REQUIRE(rep.value_converges);
    REQUIRE(rep.dx_nondecreasing);
    REQUIRE(rep.max_dx_drop == 0.0);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        REQUIRE(rep.rows[i].n == ns[i]);
        REQUIRE(rep.rows[i].gap_to_f == rep.rows[i].f_n - rep.f_exact);
        // kink gap scales exactly like 1/n under the fixed quadrature
        REQUIRE_THAT(rep.rows[i].gap_to_f * static_cast<double>(ns[i]),
                     WithinAbs(kAbsMoment, 1e-10));
    }
}

TEST_CASE("convergence report flags a genuine slope drop") {
    // ending below the strike, the smoothed slope falls toward -1 as the
    // kernel support narrows past the margin
    Path y = make_path(1.0, {0.3, -0.1, -0.05});
    std::vector<std::int64_t> ns{2, 4, 8, 16, 32, 64, 128, 256};
    ConvergenceReport rep = convergence_report(abs_terminal_minus(0.25), y, ns);
    REQUIRE_FALSE(rep.dx_nondecreasing);
    REQUIRE(rep.max_dx_drop > 0.01);
    REQUIRE_THAT(rep.rows.back().dx_f_n, WithinAbs(-1.0, 1e-8));
    REQUIRE(rep.rows.front().dx_f_n > rep.rows.back().dx_f_n);

    // ending above the strike the slope climbs to +1 and stays monotone
    Path above = make_path(1.0, {0.3, -0.1, 0.55});
    ConvergenceReport up = convergence_report(abs_terminal_minus(0.25), above, ns);
    REQUIRE(up.dx_nondecreasing);
    REQUIRE_THAT(up.rows.back().dx_f_n, WithinAbs(1.0, 1e-8));
}

TEST_CASE("convergence report rejects bad inputs") {
    Path y = make_path(1.0, {0.0, 0.1});
    REQUIRE_THROWS_AS(convergence_report(running_min(), y, {2, 4}), std::invalid_argument);
    REQUIRE_THROWS_AS(convergence_report(abs_terminal_minus(0.0), y, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(MollifiedFunctional(running_max(), 0), std::invalid_argument);
    REQUIRE_THROWS_AS(MollifiedFunctional(running_max(), 4, 4), std::invalid_argument);
}

TEST_CASE("mollification preserves convexity of the bump profile") {
    Path y = make_path(1.0, {0.3, -0.1, 0.12});
    MollifiedFunctional fn(abs_terminal_minus(0.25), 4);
    rng::Philox4x64 gen{{2718, 0}};
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto w = gen({s, 0, 0, 0});
        double h1 = -2.0 + 4.0 * rng::to_unit_open(w[0]);
        double h2 = -2.0 + 4.0 * rng::to_unit_open(w[1]);
        double lam = rng::to_unit_open(w[2]);
        double mid = fn.eval_bumped(y, lam * h1 + (1.0 - lam) * h2);
        double chord = lam * fn.eval_bumped(y, h1) + (1.0 - lam) * fn.eval_bumped(y, h2);
        REQUIRE(mid <= chord + 1e-12);
    }
}

TEST_CASE("functional wrapper exposes the smoothed value") {
    MollifiedFunctional fn(abs_terminal_minus(0.0), 8);
    Functional wrapped = fn.as_functional();
    Path y = make_path(1.0, {0.3, -0.2, 0.4});
    REQUIRE(wrapped.evaluate(y) == fn.value(y));
    REQUIRE(wrapped.name == "abs_terminal_minus_mollified");
    REQUIRE(wrapped.convex);
}
