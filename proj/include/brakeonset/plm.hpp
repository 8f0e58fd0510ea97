#pragma once

#include <cstddef>
#include <vector>

#include "brakeonset/kinematics.hpp"

namespace brakeonset {

/// Two-piece piecewise linear acceleration model: constant a0 until the
/// onset t_b, then a linear decrease with jerk j_b (j_b <= 0).
struct PlmParams {
    double a0 = 0.0;   ///< m/s^2
    double t_b = 0.0;  ///< seconds
    double j_b = 0.0;  ///< m/s^3
};

/// A parameter triple together with its goodness of fit.
struct PlmFit {
    PlmParams params;
    double r2 = 0.0;  ///< <= 1, may be negative
};

/// Axis widths and steps for the per-event search grid.
struct GridConfig {
    double a0_halfwidth = 1.0;  ///< m/s^2 around the window a_max
    double a0_step = 0.1;       ///< m/s^2
    double tb_step = 0.1;       ///< seconds
    double jb_margin = 5.0;     ///< m/s^3 below the window j_min
    double jb_step = 0.2;       ///< m/s^3
};

/// Explicit, uniformly stepped search axes. Every axis is non-empty and
/// strictly increasing.
struct GridSpec {
    std::vector<double> a0_values;
    std::vector<double> tb_values;
    std::vector<double> jb_values;

    std::size_t size() const {
        return a0_values.size() * tb_values.size() * jb_values.size();
    }
    bool empty() const {
        return a0_values.empty() || tb_values.empty() || jb_values.empty();
    }
};

/// k-th value of a uniformly stepped axis, anchor + k*step. Deliberately
/// out of line: grid construction, the synthetic generators and the tests
/// must all see bit-identical axis values.
double grid_axis_value(double anchor, std::size_t k, double step);

/// Model acceleration at time t: a0 before t_b, a0 + j_b*(t - t_b) from
/// t_b on. Continuous at t_b.
double plm_predict(const PlmParams& params, double t);

/// Coefficient of determination, 1 - SS_res/SS_tot, of the model against
/// the observed samples. May be negative for fits worse than the mean.
/// Throws DegenerateVariance when all sample values are equal.
double r_squared(const PlmParams& params, const KinematicSeries& series);

/// Event-specific search grid:
///   a0  spans [a_max - halfwidth, a_max + halfwidth], anchored low,
///   t_b spans [t_start, t_end], anchored at t_start,
///   j_b spans [j_min - margin, 0], anchored at j_min - margin and clipped
///       to <= 0 (zero itself is kept).
/// Throws EmptyGrid when an axis produces no values (j_min - margin > 0).
GridSpec build_grid(const WindowStats& stats, double t_start, double t_end,
                    const GridConfig& cfg = {});

/// Exhaustive search for the triple maximizing r_squared over the full
/// Cartesian grid. Equal-r2 ties break toward earlier t_b, then steeper
/// (more negative) j_b, then smaller a0, which makes the winner independent
/// of traversal order.
PlmFit grid_search(const KinematicSeries& series, const GridSpec& grid);

/// Reference implementation of grid_search: the plainest possible triple
/// loop, no precomputation of any kind. Permanently kept as a cross-check;
/// must return a result identical to grid_search on every input.
PlmFit oracle_fit(const KinematicSeries& series, const GridSpec& grid);

}  // namespace brakeonset
