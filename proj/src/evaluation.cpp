#include "brakeonset/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace brakeonset {

const char* to_string(MissingDeviationReason reason) {
    switch (reason) {
        case MissingDeviationReason::no_model_output:
            return "no_model_output";
        case MissingDeviationReason::model_output_but_no_braking_annotation:
            return "no_braking";
        case MissingDeviationReason::no_response_annotation:
            return "no_response";
        case MissingDeviationReason::incomplete_series:
            return "incomplete_series";
    }
    return "unknown";
}

Deviation deviation(const OnsetResult& result, const Annotation& annotation) {
    if (!result.is_estimate()) {
        return Deviation::missing(result.event_id(), MissingDeviationReason::no_model_output);
    }
    switch (annotation.kind()) {
        case Annotation::Kind::no_braking:
            return Deviation::missing(
                result.event_id(),
                MissingDeviationReason::model_output_but_no_braking_annotation);
        case Annotation::Kind::no_response:
            return Deviation::missing(result.event_id(),
                                      MissingDeviationReason::no_response_annotation);
        case Annotation::Kind::brake_onset:
            break;
    }
    return Deviation::numeric(result.event_id(),
                              result.estimate().fit.params.t_b - annotation.onset_time());
}

ConfusionCounts classify(std::span<const EvalEvent> events, double diff_threshold,
                         double r2_threshold) {
    if (!(diff_threshold > 0.0)) {
        throw std::invalid_argument("diff_threshold must be positive");
    }
    ConfusionCounts counts;
    for (const EvalEvent& e : events) {
        if (!e.dev.is_numeric()) {
            continue;
        }
        if (!e.r2) {
            throw std::invalid_argument("numeric deviation without r2 for " +
                                        e.dev.event_id());
        }
        const bool actual_positive = std::abs(e.dev.seconds()) <= diff_threshold;
        const bool predicted_positive = *e.r2 >= r2_threshold;
        if (actual_positive) {
            predicted_positive ? ++counts.tp : ++counts.fn;
        } else {
            predicted_positive ? ++counts.fp : ++counts.tn;
        }
    }
    return counts;
}

std::vector<double> roc_thresholds(double step) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("roc step must be positive");
    }
    std::vector<double> thresholds;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * step;
        if (t > 1.0 + step * 1e-9) {
            break;
        }
        thresholds.push_back(std::min(t, 1.0));
    }
    return thresholds;
}

namespace {

double trapezoid_auc(std::vector<std::pair<double, double>> pts) {
    pts.emplace_back(0.0, 0.0);
    pts.emplace_back(1.0, 1.0);
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        area += (pts[i + 1].first - pts[i].first) * (pts[i].second + pts[i + 1].second) * 0.5;
    }
    return area;
}

}  // namespace

RocCurve roc_curve(std::span<const EvalEvent> events, double diff_threshold,
                   std::span<const double> thresholds) {
    std::size_t positives = 0;
    std::size_t negatives = 0;
    for (const EvalEvent& e : events) {
        if (!e.dev.is_numeric()) {
            continue;
        }
        (std::abs(e.dev.seconds()) <= diff_threshold) ? ++positives : ++negatives;
    }
    if (positives == 0 || negatives == 0) {
        throw UndefinedRate("ROC needs both actual positives and negatives (got " +
                            std::to_string(positives) + "/" + std::to_string(negatives) + ")");
    }

    std::vector<double> ordered(thresholds.begin(), thresholds.end());
    std::sort(ordered.begin(), ordered.end());

    RocCurve curve;
    std::vector<std::pair<double, double>> pts;
    for (double threshold : ordered) {
        const ConfusionCounts c = classify(events, diff_threshold, threshold);
        const double tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
        const double fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
        curve.points.push_back({threshold, fpr, tpr});
        pts.emplace_back(fpr, tpr);
    }
    curve.auc = trapezoid_auc(std::move(pts));
    return curve;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("pearson_r inputs differ in length");
    }
    if (x.size() < 2) {
        throw std::invalid_argument("pearson_r needs at least 2 points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DegenerateVariance("pearson_r input is constant");
    }
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

std::vector<std::string> amin_filter(
    std::span<const std::pair<std::string, double>> windowed_amin, double threshold) {
    std::vector<std::string> flagged;
    for (const auto& [event_id, a_min] : windowed_amin) {
        if (a_min >= threshold) {
            flagged.push_back(event_id);
        }
    }
    return flagged;
}

DeviationHistogram deviation_histogram(std::span<const double> deviations, double bin_width,
                                       double small_threshold, double upper_threshold) {
    if (!(bin_width > 0.0)) {
        throw std::invalid_argument("bin width must be positive");
    }
    DeviationHistogram hist;
    if (deviations.empty()) {
        return hist;
    }

    // Bin k covers [(k - 0.5)*w, (k + 0.5)*w), so zero sits at a bin center.
    std::map<long long, std::size_t> counts;
    std::size_t within_small = 0;
    std::size_t within_upper = 0;
    for (double d : deviations) {
        const long long k = static_cast<long long>(std::floor(d / bin_width + 0.5));
        ++counts[k];
        if (std::abs(d) <= small_threshold) {
            ++within_small;
        }
        if (std::abs(d) <= upper_threshold) {
            ++within_upper;
        }
    }
    for (const auto& [k, count] : counts) {
        const double lo = (static_cast<double>(k) - 0.5) * bin_width;
        const double hi = (static_cast<double>(k) + 0.5) * bin_width;
        hist.bins.push_back({lo, hi, count});
    }
    const double n = static_cast<double>(deviations.size());
    hist.share_within_small = static_cast<double>(within_small) / n;
    hist.share_within_upper = static_cast<double>(within_upper) / n;
    return hist;
}

EvalSummary summarize(std::span<const EvalRecord> records, const EvalConfig& cfg) {
    EvalSummary summary;
    summary.n_records = records.size();

    std::vector<EvalEvent> events;
    std::vector<double> numeric;
    std::vector<double> r2s;
    std::vector<double> abs_devs;
    std::vector<std::pair<std::string, double>> amins;
    for (const EvalRecord& rec : records) {
        events.push_back({rec.deviation, rec.r2});
        if (rec.deviation.is_numeric()) {
            numeric.push_back(rec.deviation.seconds());
            if (rec.r2) {
                r2s.push_back(*rec.r2);
                abs_devs.push_back(std::abs(rec.deviation.seconds()));
            }
        } else {
            ++summary.missing_by_reason[rec.deviation.missing_reason()];
        }
        if (rec.a_min) {
            amins.emplace_back(rec.event_id, *rec.a_min);
        }
    }
    summary.n_numeric = numeric.size();
    summary.histogram = deviation_histogram(numeric, cfg.hist_bin_width);
    summary.confusion = classify(events, cfg.diff_threshold, cfg.r2_threshold);

    try {
        const std::vector<double> thresholds = roc_thresholds(cfg.roc_step);
        summary.roc = roc_curve(events, cfg.diff_threshold, thresholds);
    } catch (const UndefinedRate&) {
        summary.roc = std::nullopt;
    }

    if (r2s.size() >= 2) {
        try {
            summary.pearson_r2_absdev = pearson_r(r2s, abs_devs);
        } catch (const DegenerateVariance&) {
            summary.pearson_r2_absdev = std::nullopt;
        }
    }

    if (cfg.amin_threshold) {
        summary.amin_flagged = amin_filter(amins, *cfg.amin_threshold);
    }
    return summary;
}

}  // namespace brakeonset
