#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "brakeonset/errors.hpp"

namespace brakeonset {

/// One time-stamped longitudinal acceleration sample. Deceleration is
/// negative.
struct Sample {
    double t = 0.0;  ///< seconds
    double a = 0.0;  ///< m/s^2
};

/// Jerk of one forward difference, reported at the left timestamp.
struct JerkSample {
    double t = 0.0;  ///< seconds
    double j = 0.0;  ///< m/s^3
};

/// Extrema and minimum jerk of one series window.
struct WindowStats {
    double a_max = 0.0;
    double a_min = 0.0;
    double t_of_a_min = 0.0;
    double j_min = 0.0;
    std::size_t sample_count = 0;
};

/// Immutable, approximately uniformly sampled acceleration time series.
///
/// Construction validates the raw samples: strictly increasing timestamps,
/// at least two samples, all values finite, and no step deviating from the
/// median step by more than `uniformity_tol` of the median step. Violations
/// throw SeriesError. The series is never resampled or smoothed.
class KinematicSeries {
public:
    explicit KinematicSeries(std::vector<Sample> samples, double uniformity_tol = 0.2);

    std::span<const Sample> samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    const Sample& front() const { return samples_.front(); }
    const Sample& back() const { return samples_.back(); }

    /// Median step, inferred at construction.
    double nominal_dt() const { return nominal_dt_; }

    bool contains_time(double t) const { return t >= front().t && t <= back().t; }

private:
    std::vector<Sample> samples_;
    double nominal_dt_ = 0.0;
};

/// All samples with t_lo <= t <= t_hi, order preserved. Requires
/// t_lo < t_hi; throws EmptyWindow when fewer than two samples fall inside.
KinematicSeries slice_window(const KinematicSeries& series, double t_lo, double t_hi);

/// Earliest sample attaining the minimum acceleration within [t_lo, t_hi].
/// Throws EmptyWindow when no sample falls inside.
Sample argmin_accel(const KinematicSeries& series, double t_lo, double t_hi);

/// Maximum acceleration within [t_lo, t_hi]. Throws EmptyWindow when no
/// sample falls inside.
double max_accel(const KinematicSeries& series, double t_lo, double t_hi);

/// Forward-difference jerk over consecutive samples,
/// j_i = (a_{i+1} - a_i) / (t_{i+1} - t_i), reported at t_i. A series of n
/// samples yields n-1 entries.
std::vector<JerkSample> jerk_series(const KinematicSeries& series);

/// Minimum jerk over consecutive sample pairs lying fully inside
/// [t_lo, t_hi]. Throws EmptyWindow when the window yields no jerk value.
double min_jerk(const KinematicSeries& series, double t_lo, double t_hi);

/// a_max, a_min (with its earliest timestamp) and j_min of the window
/// slice. Throws EmptyWindow when the slice holds fewer than two samples.
WindowStats window_stats(const KinematicSeries& series, double t_lo, double t_hi);

}  // namespace brakeonset
