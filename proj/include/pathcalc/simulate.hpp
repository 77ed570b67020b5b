#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathcalc/grid.hpp"

namespace pathcalc {

enum class SimKind { brownian, drifted_brownian, scaled_brownian };

SimKind sim_kind_from_string(const std::string& name);
std::string to_string(SimKind kind);

/// Deterministic description of one simulated semimartingale path.
struct SimSpec {
    SimKind kind = SimKind::brownian;
    double x0 = 0.0;
    double sigma = 1.0;
    double mu = 0.0;
    TimeGrid grid{1.0, 1};
    std::uint64_t seed = 0;
};

/// x_i = x0 + mu t_i + sigma w_i with w the cumulative sqrt(dt)-scaled
/// normal increments, so sigma scales paths bitwise. Same spec, same path.
Path simulate_path(const SimSpec& spec);

/// Member j is simulate_path with seed derive_seed(spec.seed, j); identical
/// output for any thread count or generation order.
std::vector<Path> simulate_ensemble(const SimSpec& spec, std::int64_t n_paths, int threads = 0);

/// Runs fn(j) for j in [0, n) across at most `threads` workers (0 means the
/// hardware count) with a static block split; fn must write only to its own
/// slots so results cannot depend on the worker count.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn);

}  // namespace pathcalc
