#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace pathcalc {

/// Uniform grid t_i = i*dt on [0, T], dt = T/N.
class TimeGrid {
public:
    TimeGrid(double horizon, std::int64_t steps);

    double horizon() const { return horizon_; }
    std::int64_t steps() const { return steps_; }
    double dt() const { return dt_; }
    double time(std::int64_t i) const { return static_cast<double>(i) * dt_; }

    /// Smallest index with t_i >= s. On-grid times map to their own index
    /// despite rounding noise (relative slack 1e-9).
    std::int64_t index_ceil(double s) const;
    /// Largest index with t_i <= s, same slack.
    std::int64_t index_floor(double s) const;

    bool operator==(const TimeGrid& other) const {
        return horizon_ == other.horizon_ && steps_ == other.steps_;
    }

private:
    double horizon_;
    std::int64_t steps_;
    double dt_;
};

/// A cadlag step path observed at grid points 0..end_index. The value
/// sequence may stop before the grid horizon; deformations never mutate,
/// they return fresh paths.
class Path {
public:
    Path(TimeGrid grid, std::vector<double> values);

    const TimeGrid& grid() const { return grid_; }
    std::int64_t end_index() const { return static_cast<std::int64_t>(values_.size()) - 1; }
    double end_time() const { return grid_.time(end_index()); }
    double last() const { return values_.back(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::int64_t i) const { return values_[static_cast<std::size_t>(i)]; }

    bool same_grid(const Path& other) const { return grid_ == other.grid_; }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// Extends Y by repeating its last value up to time s (s snaps up to the
/// grid). Throws std::domain_error past the horizon, std::invalid_argument
/// for s before the current end time.
Path flat_extend(const Path& y, double s);

/// Adds h to the last value only.
Path bump(const Path& y, double h);

/// Sets the last value to exactly v; equals bump(y, v - last) up to the
/// final value being written directly.
Path replace_last(const Path& y, double v);

/// Prefix of Y up to time s (snaps down). Throws std::invalid_argument when
/// s exceeds the end time or is negative.
Path restrict(const Path& y, double s);

/// d(Y, Z) = sup_i |Y-extended(i) - Z(i)| + |t_Y - t_Z| where the shorter
/// path is flat-extended to the longer end. Grids must match.
double lambda_distance(const Path& y, const Path& z);

/// CSV with header "t,value", one row per grid point.
void write_path_csv(const Path& y, std::ostream& out);

/// Reads the CSV form back; spacing must be uniform within relative 1e-9,
/// values finite. Violations throw std::invalid_argument.
Path read_path_csv(std::istream& in);

}  // namespace pathcalc
