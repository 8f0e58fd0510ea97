#include "brakeonset/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace brakeonset {

namespace {

double median_step(const std::vector<Sample>& samples) {
    std::vector<double> steps;
    steps.reserve(samples.size() - 1);
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        steps.push_back(samples[i + 1].t - samples[i].t);
    }
    std::sort(steps.begin(), steps.end());
    const std::size_t n = steps.size();
    if (n % 2 == 1) {
        return steps[n / 2];
    }
    return 0.5 * (steps[n / 2 - 1] + steps[n / 2]);
}

}  // namespace

KinematicSeries::KinematicSeries(std::vector<Sample> samples, double uniformity_tol)
    : samples_(std::move(samples)) {
    if (samples_.size() < 2) {
        throw SeriesError("series needs at least 2 samples, got " +
                          std::to_string(samples_.size()));
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i].t) || !std::isfinite(samples_[i].a)) {
            throw SeriesError("non-finite value at sample " + std::to_string(i));
        }
        if (i > 0 && samples_[i].t <= samples_[i - 1].t) {
            throw SeriesError("timestamps not strictly increasing at sample " +
                              std::to_string(i));
        }
    }
    nominal_dt_ = median_step(samples_);
    for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
        const double step = samples_[i + 1].t - samples_[i].t;
        if (std::abs(step - nominal_dt_) > uniformity_tol * nominal_dt_) {
            throw SeriesError("non-uniform sampling at t=" + std::to_string(samples_[i].t) +
                              ": step " + std::to_string(step) + " vs nominal " +
                              std::to_string(nominal_dt_));
        }
    }
}

KinematicSeries slice_window(const KinematicSeries& series, double t_lo, double t_hi) {
    if (!(t_lo < t_hi)) {
        throw std::invalid_argument("slice_window requires t_lo < t_hi");
    }
    std::vector<Sample> inside;
    for (const Sample& s : series.samples()) {
        if (s.t > t_hi) {
            break;
        }
        if (s.t >= t_lo) {
            inside.push_back(s);
        }
    }
    if (inside.size() < 2) {
        throw EmptyWindow("window [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) +
                          "] holds " + std::to_string(inside.size()) + " samples");
    }
    return KinematicSeries(std::move(inside));
}

Sample argmin_accel(const KinematicSeries& series, double t_lo, double t_hi) {
    const Sample* best = nullptr;
    for (const Sample& s : series.samples()) {
        if (s.t > t_hi) {
            break;
        }
        if (s.t < t_lo) {
            continue;
        }
        if (best == nullptr || s.a < best->a) {  // strict: earliest tie wins
            best = &s;
        }
    }
    if (best == nullptr) {
        throw EmptyWindow("no samples in [" + std::to_string(t_lo) + ", " +
                          std::to_string(t_hi) + "]");
    }
    return *best;
}

double max_accel(const KinematicSeries& series, double t_lo, double t_hi) {
    bool found = false;
    double best = -std::numeric_limits<double>::infinity();
    for (const Sample& s : series.samples()) {
        if (s.t > t_hi) {
            break;
        }
        if (s.t < t_lo) {
            continue;
        }
        if (!found || s.a > best) {
            best = s.a;
            found = true;
        }
    }
    if (!found) {
        throw EmptyWindow("no samples in [" + std::to_string(t_lo) + ", " +
                          std::to_string(t_hi) + "]");
    }
    return best;
}

std::vector<JerkSample> jerk_series(const KinematicSeries& series) {
    const auto samples = series.samples();
    std::vector<JerkSample> jerks;
    jerks.reserve(samples.size() - 1);
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double dj = (samples[i + 1].a - samples[i].a) / (samples[i + 1].t - samples[i].t);
        jerks.push_back({samples[i].t, dj});
    }
    return jerks;
}

double min_jerk(const KinematicSeries& series, double t_lo, double t_hi) {
    const KinematicSeries slice = slice_window(series, t_lo, t_hi);
    double best = std::numeric_limits<double>::infinity();
    for (const JerkSample& js : jerk_series(slice)) {
        best = std::min(best, js.j);
    }
    return best;
}

WindowStats window_stats(const KinematicSeries& series, double t_lo, double t_hi) {
    const KinematicSeries slice = slice_window(series, t_lo, t_hi);
    const Sample min_sample = argmin_accel(slice, t_lo, t_hi);
    WindowStats stats;
    stats.a_max = max_accel(slice, t_lo, t_hi);
    stats.a_min = min_sample.a;
    stats.t_of_a_min = min_sample.t;
    stats.j_min = min_jerk(series, t_lo, t_hi);
    stats.sample_count = slice.size();
    return stats;
}

}  // namespace brakeonset
