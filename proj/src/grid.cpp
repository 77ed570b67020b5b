#include "pathcalc/grid.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pathcalc {

namespace {
constexpr double kSnapSlack = 1e-9;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

TimeGrid::TimeGrid(double horizon, std::int64_t steps)
    : horizon_(horizon), steps_(steps), dt_(horizon / static_cast<double>(steps)) {
    require(std::isfinite(horizon) && horizon > 0.0, "TimeGrid: horizon must be positive");
    require(steps >= 1, "TimeGrid: need at least one step");
}

std::int64_t TimeGrid::index_ceil(double s) const {
    return static_cast<std::int64_t>(std::ceil(s / dt_ - kSnapSlack * static_cast<double>(steps_)));
}

std::int64_t TimeGrid::index_floor(double s) const {
    return static_cast<std::int64_t>(std::floor(s / dt_ + kSnapSlack * static_cast<double>(steps_)));
}

Path::Path(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    require(!values_.empty(), "Path: empty value sequence");
    require(end_index() <= grid_.steps(), "Path: more values than grid points");
    for (double v : values_) require(std::isfinite(v), "Path: non-finite value");
}

Path flat_extend(const Path& y, double s) {
    const TimeGrid& g = y.grid();
    if (s > g.horizon() * (1.0 + 1e-12) || g.index_ceil(s) > g.steps())
        throw std::domain_error("flat_extend: target time beyond horizon");
    std::int64_t j = g.index_ceil(s);
    if (j < y.end_index()) throw std::invalid_argument("flat_extend: target before end time");
    std::vector<double> v(y.values().begin(), y.values().end());
    v.resize(static_cast<std::size_t>(j) + 1, y.last());
    return Path(g, std::move(v));
}

Path bump(const Path& y, double h) {
    std::vector<double> v(y.values().begin(), y.values().end());
    v.back() += h;
    return Path(y.grid(), std::move(v));
}

Path replace_last(const Path& y, double value) {
    std::vector<double> v(y.values().begin(), y.values().end());
    v.back() = value;
    return Path(y.grid(), std::move(v));
}

Path restrict(const Path& y, double s) {
    if (s < 0.0) throw std::invalid_argument("restrict: negative time");
    std::int64_t j = y.grid().index_floor(s);
    if (j > y.end_index()) throw std::invalid_argument("restrict: time beyond end of path");
    std::vector<double> v(y.values().begin(), y.values().begin() + j + 1);
    return Path(y.grid(), std::move(v));
}

double lambda_distance(const Path& y, const Path& z) {
    if (!y.same_grid(z)) throw std::invalid_argument("lambda_distance: grids differ");
    const Path& shorter = y.end_index() <= z.end_index() ? y : z;
    const Path& longer = y.end_index() <= z.end_index() ? z : y;
    double sup = 0.0;
    for (std::int64_t i = 0; i <= longer.end_index(); ++i) {
        double a = i <= shorter.end_index() ? shorter[i] : shorter.last();
        sup = std::max(sup, std::abs(a - longer[i]));
    }
    return sup + (longer.end_time() - shorter.end_time());
}

void write_path_csv(const Path& y, std::ostream& out) {
    out << "t,value\n";
    out.precision(17);
    for (std::int64_t i = 0; i <= y.end_index(); ++i)
        out << y.grid().time(i) << ',' << y[i] << '\n';
}

Path read_path_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "path csv: empty input");
    require(line == "t,value" || line == "t,value\r", "path csv: bad header");
    std::vector<double> times, values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double t = 0.0, v = 0.0;
        char comma = 0;
        require(static_cast<bool>(row >> t >> comma >> v) && comma == ',',
                "path csv: malformed row");
        times.push_back(t);
        values.push_back(v);
    }
    require(times.size() >= 2, "path csv: need at least two rows");
    require(times.front() == 0.0, "path csv: first time must be 0");
    const double dt = times[1] - times[0];
    require(dt > 0.0, "path csv: nonpositive spacing");
    for (std::size_t i = 1; i < times.size(); ++i) {
        double gap = times[i] - times[i - 1];
        require(std::abs(gap - dt) <= 1e-9 * std::max(1.0, std::abs(times[i])),
                "path csv: non-uniform spacing");
    }
    std::int64_t n = static_cast<std::int64_t>(times.size()) - 1;
    return Path(TimeGrid(dt * static_cast<double>(n), n), std::move(values));
}

}  // namespace pathcalc
