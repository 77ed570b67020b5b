#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "pathcalc/grid.hpp"

namespace pathcalc {

/// Cumulative quadratic variation: q_j = sum of squared increments before j.
std::vector<double> qv_process(const Path& y);

/// Left-point Riemann sum of g against the path increments: g carries one
/// value per grid interval (g.size() == end_index allowed, or one longer
/// with the final value ignored).
double ito_integral(std::span<const double> g, const Path& y);

enum class Convention { quarter, half };
double convention_constant(Convention c);  // 0.25 or 0.5
const char* to_string(Convention c);

enum class BandPoint { left, midpoint };

/// Uniform level lattice y_k = anchor + (k - anchor_index) * dy, with the
/// anchor exactly on the lattice.
struct LevelGrid {
    double anchor = 0.0;
    double dy = 1.0;
    std::int64_t anchor_index = 0;
    std::int64_t count = 0;

    double level(std::int64_t k) const {
        return anchor + static_cast<double>(k - anchor_index) * dy;
    }
};

/// Lattice spanning [lo - 3*eps, hi + 3*eps] of a value sequence, aligned so
/// `anchor` is a lattice point.
LevelGrid make_level_grid(std::span<const double> values, double eps, double dy, double anchor);

/// Band-count local time at one level: c/eps * sum over increments of
/// 1{|pos_i - level| <= eps} * (dx_i)^2, where pos is the indicator position
/// sequence (the path itself, or a derived process such as x minus its
/// running max) and dx the increments of the underlying path.
double band_local_time(std::span<const double> pos, std::span<const double> dx,
                       double level, double eps, Convention conv,
                       BandPoint point = BandPoint::left);
double band_local_time(const Path& y, double level, double eps, Convention conv,
                       BandPoint point = BandPoint::left);

/// The estimated surface L(t_j, y_k). Stores the indicator positions and
/// squared increments; the final row is materialized, earlier rows and the
/// time increments stream on demand.
class LocalTimeField {
public:
    /// Field of the path itself.
    LocalTimeField(const Path& y, LevelGrid levels, double eps, Convention conv,
                   BandPoint point = BandPoint::left);
    /// Field of a derived position sequence carrying the path's increments.
    LocalTimeField(std::vector<double> pos, std::vector<double> dx, double dt,
                   LevelGrid levels, double eps, Convention conv,
                   BandPoint point = BandPoint::left);

    const LevelGrid& levels() const { return levels_; }
    double eps() const { return eps_; }
    Convention convention() const { return conv_; }
    double dt() const { return dt_; }
    std::int64_t steps() const { return static_cast<std::int64_t>(dx_.size()); }

    /// L(T, y_k) for the whole lattice.
    std::span<const double> final_row() const { return final_row_; }
    /// L(T, level(k)).
    double at(std::int64_t k) const { return final_row_[static_cast<std::size_t>(k)]; }

    /// 2 * sum_k L(T, y_k) * dy.
    double total_mass() const;

    /// Row increment at time step i: calls fn(i, k_lo, k_hi, w) where cells
    /// k_lo..k_hi gain w = c/eps * dx_i^2 going from L(t_i, .) to
    /// L(t_{i+1}, .). Steps outside the band range produce no call.
    void for_each_increment(const std::function<void(std::int64_t, std::int64_t, std::int64_t, double)>& fn) const;

    /// L(t_j, .) recomputed by a prefix scan.
    std::vector<double> row(std::int64_t j) const;

private:
    LevelGrid levels_;
    double eps_;
    Convention conv_;
    BandPoint point_;
    double dt_;
    std::vector<double> pos_;
    std::vector<double> dx_;
    std::vector<double> final_row_;
};

/// CSV dump t,y,L over the full lattice; row count is (steps+1) * levels, so
/// keep this to small fields.
void write_field_csv(const LocalTimeField& field, std::ostream& out);

/// Occupation sum: sum_j psi(t_j, x_j) * dx_j^2.
double occupation_lhs(const std::function<double(double, double)>& psi, const Path& y);

/// 2 * sum_k dy * sum_j psi(t_j, y_k) * (L(t_{j+1},y_k) - L(t_j,y_k)),
/// streamed off the field. Matches occupation_lhs under the quarter
/// convention; other conventions rescale the result.
double occupation_rhs(const std::function<double(double, double)>& psi, const LocalTimeField& field);

/// sum_k row_k * (g(y_{k+1}) - g(y_k)); exact for step integrands on the
/// lattice.
double stieltjes_in_y(std::span<const double> row, const LevelGrid& levels,
                      const std::function<double(double)>& g);

/// Integrand on the (t, y) lattice; declare time independence to certify
/// that mixed differences vanish cell by cell.
struct LatticeIntegrand {
    std::function<double(double t, double y)> value;
    bool time_independent = false;
};

/// sum_{j,k} L(t_j, y_k) * [g(t_{j+1},y_{k+1}) - g(t_{j+1},y_k)
///                        - g(t_j,y_{k+1}) + g(t_j,y_k)].
/// Time-independent integrands short-circuit to exact zero after the
/// declaration is spot-checked on three rows.
double double_stieltjes(const LocalTimeField& field, const LatticeIntegrand& g);

/// sum_j sum_k (g(t_j, y_{k+1}) - g(t_j, y_k)) * (L(t_{j+1},y_k) - L(t_j,y_k)):
/// the lattice form of  integral of d/dy g against d_s L, dy; the dy of the
/// derivative cancels the dy of the level integral.
double ds_local_time_integral(const LocalTimeField& field,
                              const std::function<double(double, double)>& g);

}  // namespace pathcalc
