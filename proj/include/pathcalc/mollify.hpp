#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pathcalc/functional.hpp"
#include "pathcalc/gauss.hpp"

namespace pathcalc {

/// The standard bump kernel rho(x) = C exp(-1/(1-x^2)) on (-1,1), zero
/// outside, with closed-form first and second derivatives.
class Mollifier {
public:
    /// 1 / integral of exp(-1/(1-x^2)) over (-1,1); computed once by
    /// high-precision quadrature and frozen.
    static constexpr double kNorm = 2.2522836210435810105;

    /// k-th derivative of rho at x, k in {0,1,2}. Other orders throw
    /// std::invalid_argument.
    double eval(int k, double x) const;
    double operator()(double x) const { return eval(0, x); }
};

/// Quadrature convolution of a functional against the scaled kernel
/// rho_n(u) = n rho(n u): smooth in the bump variable by construction, with
/// derivatives taken on the kernel, never on the base functional.
class MollifiedFunctional {
public:
    MollifiedFunctional(Functional base, std::int64_t n, int nodes = 64);

    /// F_n(Y, h) = sum_i w_i rho_n(h - xi_i) F(Y, xi_i) over Gauss-Legendre
    /// nodes xi_i spanning [h - 1/n, h + 1/n].
    double eval_bumped(const Path& y, double h) const;

    /// d^k/dh^k of eval_bumped via kernel derivatives, k in {0,1,2}.
    double deriv(int k, const Path& y, double h) const;

    /// f_n(Y) = F_n(Y, 0).
    double value(const Path& y) const { return eval_bumped(y, 0.0); }

    const Functional& base() const { return base_; }
    std::int64_t index() const { return n_; }
    int nodes() const { return nodes_; }

    /// Plain-functional wrapper so the derivative estimators apply.
    Functional as_functional() const;

private:
    Functional base_;
    std::int64_t n_;
    int nodes_;
};

/// Sequence of mollified functionals at one path, with the convergence
/// facts the smoothing is used for.
struct ConvergenceRow {
    std::int64_t n;
    double f_n;
    double dx_f_n;
    double gap_to_f;
};

struct ConvergenceReport {
    static constexpr double kTol = 1e-8;
    std::vector<ConvergenceRow> rows;
    double f_exact = 0.0;
    bool value_converges = true;   // |gap| nonincreasing along rows (within kTol)
    bool dx_nondecreasing = true;  // dx_f_n nondecreasing in n (within kTol)
    double max_dx_drop = 0.0;
};

/// Requires a convex-flagged base; property violations land in the report
/// flags, never in exceptions.
ConvergenceReport convergence_report(const Functional& f, const Path& y,
                                     const std::vector<std::int64_t>& ns, int nodes = 64);

/// CSV columns n,f_n,dx_f_n,gap_to_f.
void write_convergence_csv(const ConvergenceReport& report, std::ostream& out);

}  // namespace pathcalc
