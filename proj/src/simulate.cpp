#include "pathcalc/simulate.hpp"

#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pathcalc/rng.hpp"

namespace pathcalc {

SimKind sim_kind_from_string(const std::string& name) {
    if (name == "brownian") return SimKind::brownian;
    if (name == "drifted_brownian") return SimKind::drifted_brownian;
    if (name == "scaled_brownian") return SimKind::scaled_brownian;
    throw std::invalid_argument("unknown simulation kind '" + name + "'");
}

std::string to_string(SimKind kind) {
    switch (kind) {
        case SimKind::brownian: return "brownian";
        case SimKind::drifted_brownian: return "drifted_brownian";
        case SimKind::scaled_brownian: return "scaled_brownian";
    }
    return "?";
}

namespace {

void validate(const SimSpec& spec) {
    if (!(spec.sigma >= 0.0)) throw std::invalid_argument("SimSpec: sigma must be >= 0");
    if (spec.kind != SimKind::drifted_brownian && spec.mu != 0.0)
        throw std::invalid_argument("SimSpec: drift requires kind drifted_brownian");
    if (spec.kind == SimKind::brownian && spec.sigma != 1.0)
        throw std::invalid_argument("SimSpec: kind brownian fixes sigma = 1; use scaled_brownian");
}

}  // namespace

Path simulate_path(const SimSpec& spec) {
    validate(spec);
    const TimeGrid& g = spec.grid;
    rng::NormalStream z(spec.seed);
    const double sqdt = std::sqrt(g.dt());
    std::vector<double> x(static_cast<std::size_t>(g.steps()) + 1);
    double w = 0.0;
    x[0] = spec.x0;
    for (std::int64_t i = 0; i < g.steps(); ++i) {
        w += sqdt * z(i);
        x[static_cast<std::size_t>(i) + 1] = spec.x0 + spec.mu * g.time(i + 1) + spec.sigma * w;
    }
    return Path(g, std::move(x));
}

std::vector<Path> simulate_ensemble(const SimSpec& spec, std::int64_t n_paths, int threads) {
    if (n_paths < 1) throw std::invalid_argument("simulate_ensemble: need at least one path");
    validate(spec);
    std::vector<Path> out;
    out.reserve(static_cast<std::size_t>(n_paths));
    for (std::int64_t j = 0; j < n_paths; ++j) out.emplace_back(spec.grid, std::vector<double>{spec.x0});
    parallel_for(n_paths, threads, [&](std::int64_t j) {
        SimSpec derived = spec;
        derived.seed = rng::derive_seed(spec.seed, j);
        out[static_cast<std::size_t>(j)] = simulate_path(derived);
    });
    return out;
}

void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
    if (n <= 0) return;
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int workers = threads > 0 ? threads : hw;
    workers = static_cast<int>(std::min<std::int64_t>(workers, n));
    if (workers <= 1) {
        for (std::int64_t j = 0; j < n; ++j) fn(j);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::exception_ptr error;
    std::mutex error_mu;
    for (int wkr = 0; wkr < workers; ++wkr) {
        std::int64_t lo = n * wkr / workers;
        std::int64_t hi = n * (wkr + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::int64_t j = lo; j < hi; ++j) fn(j);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace pathcalc
