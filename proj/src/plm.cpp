#include "brakeonset/plm.hpp"

#include <cmath>
#include <string>

namespace brakeonset {

double grid_axis_value(double anchor, std::size_t k, double step) {
    return anchor + static_cast<double>(k) * step;
}

double plm_predict(const PlmParams& params, double t) {
    if (t < params.t_b) {
        return params.a0;
    }
    return params.a0 + params.j_b * (t - params.t_b);
}

double r_squared(const PlmParams& params, const KinematicSeries& series) {
    const auto samples = series.samples();

    double lo = samples.front().a;
    double hi = samples.front().a;
    for (const Sample& s : samples) {
        lo = std::min(lo, s.a);
        hi = std::max(hi, s.a);
    }
    if (lo == hi) {
        throw DegenerateVariance("all sample values equal " + std::to_string(lo));
    }

    double mean = 0.0;
    for (const Sample& s : samples) {
        mean += s.a;
    }
    mean /= static_cast<double>(samples.size());

    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (const Sample& s : samples) {
        const double res = s.a - plm_predict(params, s.t);
        ss_res += res * res;
        const double dev = s.a - mean;
        ss_tot += dev * dev;
    }
    return 1.0 - ss_res / ss_tot;
}

namespace {

void check_axis_config(double step, const char* axis) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw std::invalid_argument(std::string("grid step for ") + axis +
                                    " must be positive and finite");
    }
}

std::vector<double> build_axis(double anchor, double limit, double step) {
    // Inclusive of the limit, with a small relative tolerance so an
    // endpoint that lands a few ulp past the limit is still kept.
    std::vector<double> values;
    const double tol = step * 1e-9;
    for (std::size_t k = 0;; ++k) {
        const double v = grid_axis_value(anchor, k, step);
        if (v > limit + tol) {
            break;
        }
        values.push_back(v);
    }
    return values;
}

/// Total order over candidates: higher r2 first, then earlier t_b, then
/// more negative j_b, then smaller a0. Shared by both search routes.
bool fit_improves(const PlmFit& candidate, const PlmFit& best) {
    if (candidate.r2 != best.r2) {
        return candidate.r2 > best.r2;
    }
    if (candidate.params.t_b != best.params.t_b) {
        return candidate.params.t_b < best.params.t_b;
    }
    if (candidate.params.j_b != best.params.j_b) {
        return candidate.params.j_b < best.params.j_b;
    }
    return candidate.params.a0 < best.params.a0;
}

}  // namespace

GridSpec build_grid(const WindowStats& stats, double t_start, double t_end,
                    const GridConfig& cfg) {
    if (!(t_start < t_end)) {
        throw std::invalid_argument("build_grid requires t_start < t_end");
    }
    if (!(cfg.a0_halfwidth >= 0.0)) {
        throw std::invalid_argument("a0 halfwidth must be non-negative");
    }
    if (!std::isfinite(cfg.jb_margin)) {
        throw std::invalid_argument("j_b margin must be finite");
    }
    check_axis_config(cfg.a0_step, "a0");
    check_axis_config(cfg.tb_step, "t_b");
    check_axis_config(cfg.jb_step, "j_b");

    GridSpec grid;
    grid.a0_values = build_axis(stats.a_max - cfg.a0_halfwidth,
                                stats.a_max + cfg.a0_halfwidth, cfg.a0_step);
    grid.tb_values = build_axis(t_start, t_end, cfg.tb_step);

    // j_b ascends from j_min - margin and is clipped at zero; a value within
    // rounding of zero snaps to exactly zero so the j_b <= 0 invariant holds.
    const double jb_anchor = stats.j_min - cfg.jb_margin;
    const double jb_tol = cfg.jb_step * 1e-9;
    for (std::size_t k = 0;; ++k) {
        const double v = grid_axis_value(jb_anchor, k, cfg.jb_step);
        if (v > jb_tol) {
            break;
        }
        grid.jb_values.push_back(v > 0.0 ? 0.0 : v);
    }

    if (grid.empty()) {
        throw EmptyGrid("grid axis produced no values (j_min=" +
                        std::to_string(stats.j_min) + ", a_max=" +
                        std::to_string(stats.a_max) + ")");
    }
    return grid;
}

// Both searches funnel every candidate through the same r_squared kernel
// and the same comparator. The comparator is a strict total order, so the
// winner is the unique maximum and does not depend on traversal order.

PlmFit grid_search(const KinematicSeries& series, const GridSpec& grid) {
    if (grid.empty()) {
        throw EmptyGrid("grid_search called with an empty grid");
    }
    bool have = false;
    PlmFit best{};
    for (double t_b : grid.tb_values) {
        for (double j_b : grid.jb_values) {
            for (double a0 : grid.a0_values) {
                const PlmParams p{a0, t_b, j_b};
                const PlmFit candidate{p, r_squared(p, series)};
                if (!have || fit_improves(candidate, best)) {
                    best = candidate;
                    have = true;
                }
            }
        }
    }
    return best;
}

PlmFit oracle_fit(const KinematicSeries& series, const GridSpec& grid) {
    if (grid.empty()) {
        throw EmptyGrid("oracle_fit called with an empty grid");
    }
    bool have = false;
    PlmFit best{};
    for (double a0 : grid.a0_values) {
        for (double t_b : grid.tb_values) {
            for (double j_b : grid.jb_values) {
                const PlmParams p{a0, t_b, j_b};
                const PlmFit candidate{p, r_squared(p, series)};
                if (!have || fit_improves(candidate, best)) {
                    best = candidate;
                    have = true;
                }
            }
        }
    }
    return best;
}

}  // namespace brakeonset
