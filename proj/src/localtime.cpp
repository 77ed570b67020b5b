#include "pathcalc/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pathcalc {

std::vector<double> qv_process(const Path& y) {
    std::vector<double> q(static_cast<std::size_t>(y.end_index()) + 1);
    q[0] = 0.0;
    for (std::int64_t i = 0; i < y.end_index(); ++i) {
        double d = y[i + 1] - y[i];
        q[static_cast<std::size_t>(i) + 1] = q[static_cast<std::size_t>(i)] + d * d;
    }
    return q;
}

double ito_integral(std::span<const double> g, const Path& y) {
    const auto n = static_cast<std::size_t>(y.end_index());
    if (g.size() != n && g.size() != n + 1)
        throw std::invalid_argument("ito_integral: integrand length does not match the grid");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += g[i] * (y[static_cast<std::int64_t>(i) + 1] - y[static_cast<std::int64_t>(i)]);
    return acc;
}

double convention_constant(Convention c) {
    return c == Convention::quarter ? 0.25 : 0.5;
}

const char* to_string(Convention c) {
    return c == Convention::quarter ? "quarter" : "half";
}

LevelGrid make_level_grid(std::span<const double> values, double eps, double dy, double anchor) {
    if (!(eps > 0.0)) throw std::invalid_argument("make_level_grid: eps must be positive");
    if (!(dy > 0.0)) throw std::invalid_argument("make_level_grid: dy must be positive");
    if (values.empty()) throw std::invalid_argument("make_level_grid: empty value sequence");
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it - 3.0 * eps;
    double hi = *hi_it + 3.0 * eps;
    LevelGrid g;
    g.anchor = anchor;
    g.dy = dy;
    g.anchor_index = static_cast<std::int64_t>(std::ceil((anchor - lo) / dy));
    std::int64_t above = static_cast<std::int64_t>(std::ceil((hi - anchor) / dy));
    g.count = g.anchor_index + std::max<std::int64_t>(above, 0) + 1;
    if (g.anchor_index < 0) {  // anchor below the span: extend down to it
        g.count -= g.anchor_index;
        g.anchor_index = 0;
    }
    return g;
}

namespace {

struct BandExtent {
    std::int64_t lo, hi;  // inclusive cell range, possibly empty (lo > hi)
};

// Cells with |y_k - center| <= eps. The division locates the range up to
// one cell of rounding; the trim settles membership with the same direct
// comparison band_local_time uses, so the two agree bitwise at every level.
inline BandExtent band_cells(const LevelGrid& g, double center, double eps) {
    auto lo = static_cast<std::int64_t>(std::ceil((center - eps - g.anchor) / g.dy)) + g.anchor_index - 1;
    auto hi = static_cast<std::int64_t>(std::floor((center + eps - g.anchor) / g.dy)) + g.anchor_index + 1;
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, g.count - 1);
    while (lo <= hi && std::abs(g.level(lo) - center) > eps) ++lo;
    while (hi >= lo && std::abs(g.level(hi) - center) > eps) --hi;
    return {lo, hi};
}

inline double band_center(std::span<const double> pos, std::size_t i, BandPoint point) {
    return point == BandPoint::left ? pos[i] : 0.5 * (pos[i] + pos[i + 1]);
}

}  // namespace

double band_local_time(std::span<const double> pos, std::span<const double> dx,
                       double level, double eps, Convention conv, BandPoint point) {
    if (!(eps > 0.0)) throw std::invalid_argument("band_local_time: eps must be positive");
    if (pos.size() != dx.size() + 1)
        throw std::invalid_argument("band_local_time: positions must be one longer than increments");
    const double coef = convention_constant(conv) / eps;
    double acc = 0.0;
    for (std::size_t i = 0; i < dx.size(); ++i)
        if (std::abs(band_center(pos, i, point) - level) <= eps) acc += coef * (dx[i] * dx[i]);
    return acc;
}

double band_local_time(const Path& y, double level, double eps, Convention conv, BandPoint point) {
    std::vector<double> dx(static_cast<std::size_t>(y.end_index()));
    for (std::int64_t i = 0; i < y.end_index(); ++i) dx[static_cast<std::size_t>(i)] = y[i + 1] - y[i];
    return band_local_time(y.values(), dx, level, eps, conv, point);
}

LocalTimeField::LocalTimeField(const Path& y, LevelGrid levels, double eps, Convention conv,
                               BandPoint point)
    : LocalTimeField(
          [&] {
              std::vector<double> p(y.values().begin(), y.values().end());
              return p;
          }(),
          [&] {
              std::vector<double> d(static_cast<std::size_t>(y.end_index()));
              for (std::int64_t i = 0; i < y.end_index(); ++i)
                  d[static_cast<std::size_t>(i)] = y[i + 1] - y[i];
              return d;
          }(),
          y.grid().dt(), levels, eps, conv, point) {}

LocalTimeField::LocalTimeField(std::vector<double> pos, std::vector<double> dx, double dt,
                               LevelGrid levels, double eps, Convention conv, BandPoint point)
    : levels_(levels), eps_(eps), conv_(conv), point_(point), dt_(dt),
      pos_(std::move(pos)), dx_(std::move(dx)) {
    if (!(eps > 0.0)) throw std::invalid_argument("LocalTimeField: eps must be positive");
    if (levels_.count < 2) throw std::invalid_argument("LocalTimeField: level grid too small");
    if (pos_.size() != dx_.size() + 1)
        throw std::invalid_argument("LocalTimeField: positions must be one longer than increments");
    final_row_.assign(static_cast<std::size_t>(levels_.count), 0.0);
    for_each_increment([this](std::int64_t, std::int64_t lo, std::int64_t hi, double w) {
        for (std::int64_t k = lo; k <= hi; ++k) final_row_[static_cast<std::size_t>(k)] += w;
    });
}

void LocalTimeField::for_each_increment(
    const std::function<void(std::int64_t, std::int64_t, std::int64_t, double)>& fn) const {
    const double coef = convention_constant(conv_) / eps_;
    for (std::size_t i = 0; i < dx_.size(); ++i) {
        BandExtent b = band_cells(levels_, band_center(pos_, i, point_), eps_);
        if (b.lo > b.hi) continue;
        fn(static_cast<std::int64_t>(i), b.lo, b.hi, coef * (dx_[i] * dx_[i]));
    }
}

double LocalTimeField::total_mass() const {
    double acc = 0.0;
    for (double v : final_row_) acc += v;
    return 2.0 * acc * levels_.dy;
}

std::vector<double> LocalTimeField::row(std::int64_t j) const {
    if (j < 0 || j > steps()) throw std::invalid_argument("LocalTimeField::row: index out of range");
    std::vector<double> r(static_cast<std::size_t>(levels_.count), 0.0);
    const double coef = convention_constant(conv_) / eps_;
    for (std::int64_t i = 0; i < j; ++i) {
        BandExtent b = band_cells(levels_, band_center(pos_, static_cast<std::size_t>(i), point_), eps_);
        double w = coef * (dx_[static_cast<std::size_t>(i)] * dx_[static_cast<std::size_t>(i)]);
        for (std::int64_t k = b.lo; k <= b.hi; ++k) r[static_cast<std::size_t>(k)] += w;
    }
    return r;
}

void write_field_csv(const LocalTimeField& field, std::ostream& out) {
    out << "t,y,L\n";
    out.precision(17);
    std::vector<double> r(static_cast<std::size_t>(field.levels().count), 0.0);
    const LevelGrid& g = field.levels();
    auto emit = [&](std::int64_t j) {
        for (std::int64_t k = 0; k < g.count; ++k)
            out << field.dt() * static_cast<double>(j) << ',' << g.level(k) << ','
                << r[static_cast<std::size_t>(k)] << '\n';
    };
    std::int64_t next = 0;
    field.for_each_increment([&](std::int64_t i, std::int64_t lo, std::int64_t hi, double w) {
        while (next <= i) emit(next++);
        for (std::int64_t k = lo; k <= hi; ++k) r[static_cast<std::size_t>(k)] += w;
    });
    while (next <= field.steps()) emit(next++);
}

double occupation_lhs(const std::function<double(double, double)>& psi, const Path& y) {
    double acc = 0.0;
    const double dt = y.grid().dt();
    for (std::int64_t j = 0; j < y.end_index(); ++j) {
        double d = y[j + 1] - y[j];
        acc += psi(dt * static_cast<double>(j), y[j]) * (d * d);
    }
    return acc;
}

double occupation_rhs(const std::function<double(double, double)>& psi, const LocalTimeField& field) {
    const LevelGrid& g = field.levels();
    double acc = 0.0;
    field.for_each_increment([&](std::int64_t i, std::int64_t lo, std::int64_t hi, double w) {
        double t = field.dt() * static_cast<double>(i);
        for (std::int64_t k = lo; k <= hi; ++k) acc += psi(t, g.level(k)) * w;
    });
    return 2.0 * g.dy * acc;
}

double stieltjes_in_y(std::span<const double> row, const LevelGrid& levels,
                      const std::function<double(double)>& g) {
    if (row.size() != static_cast<std::size_t>(levels.count))
        throw std::invalid_argument("stieltjes_in_y: row length does not match the level grid");
    double acc = 0.0;
    double g_prev = g(levels.level(0));
    for (std::int64_t k = 0; k + 1 < levels.count; ++k) {
        double g_next = g(levels.level(k + 1));
        acc += row[static_cast<std::size_t>(k)] * (g_next - g_prev);
        g_prev = g_next;
    }
    return acc;
}

double double_stieltjes(const LocalTimeField& field, const LatticeIntegrand& g) {
    const LevelGrid& lv = field.levels();
    const double T = field.dt() * static_cast<double>(field.steps());
    if (g.time_independent) {
        // spot-check the declaration, then every mixed difference is zero
        for (std::int64_t k = 0; k < lv.count; ++k) {
            double y = lv.level(k);
            double v0 = g.value(0.0, y);
            if (g.value(0.5 * T, y) != v0 || g.value(T, y) != v0)
                throw std::invalid_argument("double_stieltjes: integrand declared time-independent but varies");
        }
        return 0.0;
    }
    // Abel summation in time: sum_j L_j (a_{j+1} - a_j)
    //   = L_N a_N - sum_j dL_j a_{j+1}  with a_j(k) the y-difference of g at t_j.
    auto ydiff = [&](double t, std::int64_t k) {
        return g.value(t, lv.level(k + 1)) - g.value(t, lv.level(k));
    };
    double acc = 0.0;
    for (std::int64_t k = 0; k + 1 < lv.count; ++k)
        acc += field.final_row()[static_cast<std::size_t>(k)] * ydiff(T, k);
    field.for_each_increment([&](std::int64_t i, std::int64_t lo, std::int64_t hi, double w) {
        double t_next = field.dt() * static_cast<double>(i + 1);
        std::int64_t top = std::min(hi, lv.count - 2);
        for (std::int64_t k = lo; k <= top; ++k) acc -= w * ydiff(t_next, k);
    });
    return acc;
}

double ds_local_time_integral(const LocalTimeField& field,
                              const std::function<double(double, double)>& g) {
    const LevelGrid& lv = field.levels();
    double acc = 0.0;
    field.for_each_increment([&](std::int64_t i, std::int64_t lo, std::int64_t hi, double w) {
        double t = field.dt() * static_cast<double>(i);
        std::int64_t top = std::min(hi, lv.count - 2);
        for (std::int64_t k = lo; k <= top; ++k)
            acc += (g(t, lv.level(k + 1)) - g(t, lv.level(k))) * w;
    });
    return acc;
}

}  // namespace pathcalc
