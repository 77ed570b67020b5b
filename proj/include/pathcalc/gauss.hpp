#pragma once

#include <vector>

namespace pathcalc {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes by Newton iteration on the Legendre recurrence; results are cached
/// per order. Order must be >= 2.
const GaussLegendre& gauss_legendre(int order);

}  // namespace pathcalc
