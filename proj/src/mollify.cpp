#include "pathcalc/mollify.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pathcalc {

double Mollifier::eval(int k, double x) const {
    const double u = 1.0 - x * x;
    if (u <= 0.0) return 0.0;
    // exp(-1/u) underflows long before the rational factors overflow
    const double core = kNorm * std::exp(-1.0 / u);
    switch (k) {
        case 0:
            return core;
        case 1:
            return core * (-2.0 * x) / (u * u);
        case 2: {
            const double x2 = x * x;
            return core * (6.0 * x2 * x2 - 2.0) / (u * u * u * u);
        }
        default:
            throw std::invalid_argument("Mollifier::eval: order must be 0, 1 or 2");
    }
}

MollifiedFunctional::MollifiedFunctional(Functional base, std::int64_t n, int nodes)
    : base_(std::move(base)), n_(n), nodes_(nodes) {
    if (n < 1) throw std::invalid_argument("MollifiedFunctional: index must be >= 1");
    if (nodes < 8) throw std::invalid_argument("MollifiedFunctional: need at least 8 nodes");
    gauss_legendre(nodes);  // warm the cache so evaluation never builds rules
}

double MollifiedFunctional::eval_bumped(const Path& y, double h) const {
    return deriv(0, y, h);
}

double MollifiedFunctional::deriv(int k, const Path& y, double h) const {
    if (k < 0 || k > 2) throw std::invalid_argument("MollifiedFunctional::deriv: order must be 0, 1 or 2");
    const GaussLegendre& rule = gauss_legendre(nodes_);
    const Mollifier rho;
    const double n = static_cast<double>(n_);
    // rho_n^(k)(u) = n^{k+1} rho^(k)(n u); nodes cover the kernel support
    // [h - 1/n, h + 1/n] exactly.
    const double half = 1.0 / n;
    double scale = n;
    for (int j = 0; j < k; ++j) scale *= n;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double xi = h + half * rule.nodes[i];
        const double w = half * rule.weights[i];
        acc += w * scale * rho.eval(k, n * (h - xi)) * ::pathcalc::eval_bumped(base_, y, xi);
    }
    return acc;
}

Functional MollifiedFunctional::as_functional() const {
    Functional f;
    f.name = base_.name + "_mollified";
    f.convex = base_.convex;
    MollifiedFunctional self = *this;
    f.evaluate = [self](const Path& y) { return self.value(y); };
    return f;
}

ConvergenceReport convergence_report(const Functional& f, const Path& y,
                                     const std::vector<std::int64_t>& ns, int nodes) {
    if (!f.convex) throw std::invalid_argument("convergence_report: functional must be convex-flagged");
    if (ns.empty()) throw std::invalid_argument("convergence_report: empty index list");
    ConvergenceReport report;
    report.f_exact = f.evaluate(y);
    for (std::int64_t n : ns) {
        MollifiedFunctional fn(f, n, nodes);
        ConvergenceRow row;
        row.n = n;
        row.f_n = fn.value(y);
        row.dx_f_n = fn.deriv(1, y, 0.0);
        row.gap_to_f = row.f_n - report.f_exact;
        report.rows.push_back(row);
    }
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        if (std::abs(report.rows[i].gap_to_f) > std::abs(report.rows[i - 1].gap_to_f) + ConvergenceReport::kTol)
            report.value_converges = false;
        double drop = report.rows[i - 1].dx_f_n - report.rows[i].dx_f_n;
        if (drop > ConvergenceReport::kTol) {
            report.dx_nondecreasing = false;
            report.max_dx_drop = std::max(report.max_dx_drop, drop);
        }
    }
    return report;
}

void write_convergence_csv(const ConvergenceReport& report, std::ostream& out) {
    out << "n,f_n,dx_f_n,gap_to_f\n";
    out.precision(17);
    for (const auto& row : report.rows)
        out << row.n << ',' << row.f_n << ',' << row.dx_f_n << ',' << row.gap_to_f << '\n';
}

}  // namespace pathcalc
