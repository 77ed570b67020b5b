#include "pathcalc/functional.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "pathcalc/rng.hpp"

namespace pathcalc {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Neville tableau evaluated at step 0; abscissae must be distinct.
DerivativeEstimate extrapolate_to_zero(const std::vector<double>& abscissae,
                                       std::vector<double> vals,
                                       std::vector<double> reported_steps) {
    DerivativeEstimate est;
    est.steps = std::move(reported_steps);
    double top_prev = vals[0];
    for (std::size_t level = 1; level < vals.size(); ++level) {
        for (std::size_t i = 0; i + level < vals.size(); ++i) {
            double s_lo = abscissae[i], s_hi = abscissae[i + level];
            vals[i] = (s_lo * vals[i + 1] - s_hi * vals[i]) / (s_lo - s_hi);
        }
        est.residual = std::abs(vals[0] - top_prev);
        top_prev = vals[0];
    }
    est.value = vals[0];
    est.diverged = !std::isfinite(est.value);
    return est;
}

void check_steps(const std::vector<double>& steps) {
    require(!steps.empty(), "derivative estimate: empty step list");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        require(steps[i] > 0.0, "derivative estimate: steps must be positive");
        if (i > 0) require(steps[i] < steps[i - 1], "derivative estimate: steps must decrease");
    }
}

std::vector<double> default_space_steps() {
    std::vector<double> s(6);
    double h = 1e-2;
    for (auto& v : s) {
        v = h;
        h *= 0.5;
    }
    return s;
}

double sgn_minus(double u) { return u <= 0.0 ? -1.0 : 1.0; }

// Uniform words for the probe sampler, one Philox stream per sample.
struct UniformStream {
    rng::Philox4x64 gen;
    std::array<std::uint64_t, 4> block{};
    std::int64_t cached = -1;
    UniformStream(std::uint64_t seed, std::uint64_t stream) { gen.key = {seed, stream}; }
    double operator()(std::int64_t i) {
        std::int64_t blk = i >> 2;
        if (blk != cached) {
            block = gen({static_cast<std::uint64_t>(blk), 0, 0, 0});
            cached = blk;
        }
        return rng::to_unit_open(block[i & 3]);
    }
};

}  // namespace

double eval_bumped(const Functional& f, const Path& y, double h) {
    return f.evaluate(bump(y, h));
}

double eval_replaced(const Functional& f, const Path& y, double v) {
    return f.evaluate(replace_last(y, v));
}

DerivativeEstimate time_derivative_est(const Functional& f, const Path& y,
                                       std::vector<double> deltas) {
    const TimeGrid& g = y.grid();
    if (deltas.empty()) {
        double d = 32.0 * g.dt();
        for (int k = 0; k < 6; ++k, d *= 0.5)
            if (g.index_ceil(y.end_time() + d) <= g.steps() && d >= g.dt()) deltas.push_back(d);
        if (deltas.empty()) throw std::domain_error("time_derivative_est: no room before horizon");
    }
    check_steps(deltas);
    const double f0 = f.evaluate(y);
    std::vector<double> effective, quotients;
    for (double d : deltas) {
        Path ext = flat_extend(y, y.end_time() + d);
        double d_eff = ext.end_time() - y.end_time();
        require(d_eff > 0.0, "time_derivative_est: step below grid resolution");
        effective.push_back(d_eff);
        quotients.push_back((f.evaluate(ext) - f0) / d_eff);
    }
    return extrapolate_to_zero(effective, quotients, effective);
}

DerivativeEstimate space_derivative_est(const Functional& f, const Path& y, Side side,
                                        std::vector<double> steps) {
    if (steps.empty()) steps = default_space_steps();
    check_steps(steps);
    const double f0 = f.evaluate(y);
    std::vector<double> quotients, abscissae;
    for (double h : steps) {
        double q = 0.0;
        switch (side) {
            case Side::left: q = (f0 - eval_bumped(f, y, -h)) / h; break;
            case Side::right: q = (eval_bumped(f, y, h) - f0) / h; break;
            case Side::central: q = (eval_bumped(f, y, h) - eval_bumped(f, y, -h)) / (2.0 * h); break;
        }
        quotients.push_back(q);
        // central quotients have an even error series, so extrapolate in h^2
        abscissae.push_back(side == Side::central ? h * h : h);
    }
    return extrapolate_to_zero(abscissae, quotients, steps);
}

DerivativeEstimate second_space_derivative_est(const Functional& f, const Path& y,
                                               std::vector<double> steps) {
    if (steps.empty()) steps = default_space_steps();
    check_steps(steps);
    const double f0 = f.evaluate(y);
    std::vector<double> quotients, abscissae;
    for (double h : steps) {
        quotients.push_back((eval_bumped(f, y, h) - 2.0 * f0 + eval_bumped(f, y, -h)) / (h * h));
        abscissae.push_back(h * h);
    }
    return extrapolate_to_zero(abscissae, quotients, steps);
}

double continuity_probe(const Functional& f, const Path& y, double radius,
                        std::int64_t samples, std::uint64_t seed) {
    require(radius > 0.0, "continuity_probe: radius must be positive");
    const double dt = y.grid().dt();
    double worst = 0.0;
    for (std::int64_t s = 0; s < samples; ++s) {
        UniformStream u(seed, static_cast<std::uint64_t>(s));
        double xi = -3.0 + 6.0 * u(0);
        std::int64_t shorten = 0;
        if (s % 2 == 1) {
            auto max_m = static_cast<std::int64_t>(0.5 * radius / dt);
            max_m = std::min(max_m, y.end_index());
            if (max_m > 0) shorten = 1 + static_cast<std::int64_t>(u(1) * static_cast<double>(max_m - 1));
        }
        double budget = (radius - static_cast<double>(shorten) * dt) * 0.999;
        std::vector<double> zv(y.values().begin(), y.values().end() - shorten);
        for (std::size_t i = 0; i < zv.size(); ++i)
            zv[i] += budget * (2.0 * u(2 + static_cast<std::int64_t>(i)) - 1.0);
        Path z(y.grid(), std::move(zv));
        worst = std::max(worst, std::abs(eval_bumped(f, y, xi) - eval_bumped(f, z, xi)));
    }
    return worst;
}

std::vector<double> prefix_max(const Path& y) {
    std::vector<double> m(y.values().begin(), y.values().end());
    for (std::size_t i = 1; i < m.size(); ++i) m[i] = std::max(m[i], m[i - 1]);
    return m;
}

std::vector<double> prefix_min(const Path& y) {
    std::vector<double> m(y.values().begin(), y.values().end());
    for (std::size_t i = 1; i < m.size(); ++i) m[i] = std::min(m[i], m[i - 1]);
    return m;
}

namespace {

std::vector<double> const_trace(const Path& y, double v) {
    return std::vector<double>(static_cast<std::size_t>(y.end_index()) + 1, v);
}

}  // namespace

Functional running_max() {
    Functional f;
    f.name = "running_max";
    f.convex = true;
    f.evaluate = [](const Path& y) { return *std::max_element(y.values().begin(), y.values().end()); };
    f.dt = [](const Path&) { return 0.0; };
    f.dx_left = [](const Path&) { return 0.0; };
    f.dx_right = [ev = f.evaluate](const Path& y) { return y.last() == ev(y) ? 1.0 : 0.0; };
    // central convention at the kink: average of the one-sided limits
    f.dx = [ev = f.evaluate](const Path& y) { return y.last() == ev(y) ? 0.5 : 0.0; };
    f.dt_trace = [](const Path& y) { return const_trace(y, 0.0); };
    f.dx_left_trace = [](const Path& y) { return const_trace(y, 0.0); };
    f.make_section_dleft = [](const Path& y) -> SectionDerivative {
        auto m = std::make_shared<std::vector<double>>(prefix_max(y));
        return [m](std::int64_t j, double v) { return v > (*m)[static_cast<std::size_t>(j)] ? 1.0 : 0.0; };
    };
    return f;
}

Functional running_min() {
    Functional f;
    f.name = "running_min";
    f.convex = false;
    f.evaluate = [](const Path& y) { return *std::min_element(y.values().begin(), y.values().end()); };
    f.dt = [](const Path&) { return 0.0; };
    f.dx_left = [ev = f.evaluate](const Path& y) { return y.last() == ev(y) ? 1.0 : 0.0; };
    f.dx_right = [](const Path&) { return 0.0; };
    f.dx = [ev = f.evaluate](const Path& y) { return y.last() == ev(y) ? 0.5 : 0.0; };
    f.dt_trace = [](const Path& y) { return const_trace(y, 0.0); };
    f.dx_left_trace = [](const Path& y) {
        auto m = prefix_min(y);
        std::vector<double> g(m.size());
        for (std::size_t j = 0; j < m.size(); ++j) g[j] = y[static_cast<std::int64_t>(j)] == m[j] ? 1.0 : 0.0;
        return g;
    };
    f.make_section_dleft = [](const Path& y) -> SectionDerivative {
        auto m = std::make_shared<std::vector<double>>(prefix_min(y));
        return [m](std::int64_t j, double v) { return v <= (*m)[static_cast<std::size_t>(j)] ? 1.0 : 0.0; };
    };
    return f;
}

Functional running_integral() {
    Functional f;
    f.name = "running_integral";
    f.evaluate = [](const Path& y) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < y.end_index(); ++i) acc += y[i];
        return acc * y.grid().dt();
    };
    f.dt = [](const Path& y) { return y.last(); };
    f.dx = [](const Path&) { return 0.0; };
    f.dx_left = f.dx;
    f.dx_right = f.dx;
    f.dxx = [](const Path&) { return 0.0; };
    f.dt_trace = [](const Path& y) { return std::vector<double>(y.values().begin(), y.values().end()); };
    f.dx_trace = [](const Path& y) { return const_trace(y, 0.0); };
    f.dxx_trace = [](const Path& y) { return const_trace(y, 0.0); };
    return f;
}

Functional quadratic_variation() {
    Functional f;
    f.name = "quadratic_variation";
    f.convex = true;
    f.evaluate = [](const Path& y) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < y.end_index(); ++i) {
            double d = y[i + 1] - y[i];
            acc += d * d;
        }
        return acc;
    };
    f.dt = [](const Path&) { return 0.0; };
    // discrete reading: y_{t-} is the previous grid value
    f.dx = [](const Path& y) {
        return y.end_index() == 0 ? 0.0 : 2.0 * (y.last() - y[y.end_index() - 1]);
    };
    f.dx_left = f.dx;
    f.dx_right = f.dx;
    f.dxx = [](const Path& y) { return y.end_index() == 0 ? 0.0 : 2.0; };
    f.dt_trace = [](const Path& y) { return const_trace(y, 0.0); };
    // continuous-path reading y_{t-} = y_t zeroes the first derivative
    f.dx_trace = [](const Path& y) { return const_trace(y, 0.0); };
    f.dx_left_trace = f.dx_trace;
    f.dxx_trace = [](const Path& y) { return const_trace(y, 2.0); };
    f.make_section_dleft = [](const Path& y) -> SectionDerivative {
        auto vals = std::make_shared<std::vector<double>>(y.values().begin(), y.values().end());
        return [vals](std::int64_t j, double v) {
            return j == 0 ? 0.0 : 2.0 * (v - (*vals)[static_cast<std::size_t>(j - 1)]);
        };
    };
    return f;
}

Functional terminal_value() {
    Functional f;
    f.name = "terminal_value";
    f.convex = true;
    f.evaluate = [](const Path& y) { return y.last(); };
    f.dt = [](const Path&) { return 0.0; };
    f.dx = [](const Path&) { return 1.0; };
    f.dx_left = f.dx;
    f.dx_right = f.dx;
    f.dxx = [](const Path&) { return 0.0; };
    f.dt_trace = [](const Path& y) { return const_trace(y, 0.0); };
    f.dx_trace = [](const Path& y) { return const_trace(y, 1.0); };
    f.dx_left_trace = f.dx_trace;
    f.dxx_trace = [](const Path& y) { return const_trace(y, 0.0); };
    f.make_section_dleft = [](const Path&) -> SectionDerivative {
        return [](std::int64_t, double) { return 1.0; };
    };
    return f;
}

Functional abs_terminal_minus(double strike) {
    Functional f;
    f.name = "abs_terminal_minus";
    f.convex = true;
    f.evaluate = [strike](const Path& y) { return std::abs(y.last() - strike); };
    f.dt = [](const Path&) { return 0.0; };
    f.dx_left = [strike](const Path& y) { return sgn_minus(y.last() - strike); };
    f.dx_right = [strike](const Path& y) { return y.last() < strike ? -1.0 : 1.0; };
    f.dx = [strike](const Path& y) {
        double u = y.last() - strike;
        return u == 0.0 ? 0.0 : sgn_minus(u);
    };
    f.dt_trace = [](const Path& y) { return const_trace(y, 0.0); };
    f.dx_left_trace = [strike](const Path& y) {
        std::vector<double> g(static_cast<std::size_t>(y.end_index()) + 1);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] = sgn_minus(y[static_cast<std::int64_t>(j)] - strike);
        return g;
    };
    f.make_section_dleft = [strike](const Path&) -> SectionDerivative {
        return [strike](std::int64_t, double v) { return sgn_minus(v - strike); };
    };
    return f;
}

Functional path_independent(std::string name, std::function<double(double, double)> h,
                            std::function<double(double, double)> h_t,
                            std::function<double(double, double)> h_y,
                            std::function<double(double, double)> h_yy, bool convex) {
    Functional f;
    f.name = std::move(name);
    f.convex = convex;
    f.evaluate = [h](const Path& y) { return h(y.end_time(), y.last()); };
    f.dt = [h_t](const Path& y) { return h_t(y.end_time(), y.last()); };
    f.dx = [h_y](const Path& y) { return h_y(y.end_time(), y.last()); };
    f.dx_left = f.dx;
    f.dx_right = f.dx;
    f.dxx = [h_yy](const Path& y) { return h_yy(y.end_time(), y.last()); };
    auto map_trace = [](const Path& y, const std::function<double(double, double)>& fn) {
        std::vector<double> g(static_cast<std::size_t>(y.end_index()) + 1);
        for (std::size_t j = 0; j < g.size(); ++j)
            g[j] = fn(y.grid().time(static_cast<std::int64_t>(j)), y[static_cast<std::int64_t>(j)]);
        return g;
    };
    f.dt_trace = [h_t, map_trace](const Path& y) { return map_trace(y, h_t); };
    f.dx_trace = [h_y, map_trace](const Path& y) { return map_trace(y, h_y); };
    f.dx_left_trace = f.dx_trace;
    f.dxx_trace = [h_yy, map_trace](const Path& y) { return map_trace(y, h_yy); };
    f.make_section_dleft = [h_y](const Path& y) -> SectionDerivative {
        auto grid = y.grid();
        return [h_y, grid](std::int64_t j, double v) { return h_y(grid.time(j), v); };
    };
    return f;
}

PsiSpec psi_catalogue(const std::string& name) {
    PsiSpec s;
    s.name = name;
    if (name == "one") {
        s.psi = [](double) { return 1.0; };
        s.dpsi = [](double) { return 0.0; };
        s.integral = [](double x) { return x; };
    } else if (name == "id") {
        s.psi = [](double u) { return u; };
        s.dpsi = [](double) { return 1.0; };
        s.integral = [](double x) { return 0.5 * x * x; };
    } else if (name == "square") {
        s.psi = [](double u) { return u * u; };
        s.dpsi = [](double u) { return 2.0 * u; };
        s.integral = [](double x) { return x * x * x / 3.0; };
    } else if (name == "exp_neg") {
        s.psi = [](double u) { return std::exp(-u); };
        s.dpsi = [](double u) { return -std::exp(-u); };
        s.integral = [](double x) { return 1.0 - std::exp(-x); };
    } else {
        throw std::invalid_argument("psi_catalogue: unknown member '" + name + "'");
    }
    return s;
}

double psi_h(const PsiSpec& spec, double x1, double x2, double h0) {
    return spec.integral(x2) - spec.psi(x2) * (x2 - x1) + h0;
}

Functional max_martingale_functional(const PsiSpec& spec, double h0) {
    Functional f;
    f.name = "max_martingale_" + spec.name;
    f.convex = false;
    auto maxv = [](const Path& y) { return *std::max_element(y.values().begin(), y.values().end()); };
    f.evaluate = [spec, h0, maxv](const Path& y) { return psi_h(spec, y.last(), maxv(y), h0); };
    f.dt = [](const Path&) { return 0.0; };
    // dH/dh of H(y+h, max(m, y+h)) is psi(m) from either side: the diagonal
    // condition d2H(z,z) = 0 glues the two regimes.
    f.dx = [spec, maxv](const Path& y) { return spec.psi(maxv(y)); };
    f.dx_left = f.dx;
    f.dx_right = f.dx;
    f.dxx = [spec, maxv](const Path& y) {
        return y.last() == maxv(y) ? 0.5 * spec.dpsi(maxv(y)) : 0.0;
    };
    f.dt_trace = [](const Path& y) { return const_trace(y, 0.0); };
    f.dx_left_trace = [spec](const Path& y) {
        auto m = prefix_max(y);
        std::vector<double> g(m.size());
        for (std::size_t j = 0; j < m.size(); ++j) g[j] = spec.psi(m[j]);
        return g;
    };
    f.make_section_dleft = [spec](const Path& y) -> SectionDerivative {
        auto m = std::make_shared<std::vector<double>>(prefix_max(y));
        return [spec, m](std::int64_t j, double v) {
            return spec.psi(std::max((*m)[static_cast<std::size_t>(j)], v));
        };
    };
    return f;
}

}  // namespace pathcalc
