#include "pathcalc/gauss.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace pathcalc {

namespace {

// P_m(x) and P_m'(x) via the three-term recurrence.
void legendre(int m, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= m; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = m * (x * p1 - p0) / (x * x - 1.0);
}

GaussLegendre build(int m) {
    GaussLegendre rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    for (int k = 0; k < (m + 1) / 2; ++k) {
        double x = std::cos(M_PI * (k + 0.75) / (m + 0.5));
        double p = 0.0, dp = 1.0;
        for (int it = 0; it < 64; ++it) {
            legendre(m, x, p, dp);
            double step = p / dp;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        legendre(m, x, p, dp);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[k] = -x;
        rule.weights[k] = w;
        rule.nodes[m - 1 - k] = x;
        rule.weights[m - 1 - k] = w;
    }
    return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
    if (order < 2) throw std::invalid_argument("gauss_legendre: order must be >= 2");
    static std::map<int, GaussLegendre> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build(order)).first;
    return it->second;
}

}  // namespace pathcalc
