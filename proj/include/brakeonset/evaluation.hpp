#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "brakeonset/pipeline.hpp"

namespace brakeonset {

/// Why an estimate/annotation pair produced no numeric deviation.
enum class MissingDeviationReason {
    no_model_output,
    model_output_but_no_braking_annotation,
    no_response_annotation,
    incomplete_series,
};

const char* to_string(MissingDeviationReason reason);

/// Signed onset deviation of one event, estimate minus annotation in
/// seconds (negative means the model found an earlier onset), or the typed
/// reason why none exists.
class Deviation {
public:
    static Deviation numeric(std::string event_id, double seconds) {
        return Deviation(std::move(event_id), seconds);
    }
    static Deviation missing(std::string event_id, MissingDeviationReason reason) {
        return Deviation(std::move(event_id), reason);
    }

    const std::string& event_id() const { return event_id_; }
    bool is_numeric() const { return std::holds_alternative<double>(value_); }

    double seconds() const {
        if (!is_numeric()) {
            throw std::logic_error("deviation for " + event_id_ + " is missing");
        }
        return std::get<double>(value_);
    }

    MissingDeviationReason missing_reason() const {
        if (is_numeric()) {
            throw std::logic_error("deviation for " + event_id_ + " is numeric");
        }
        return std::get<MissingDeviationReason>(value_);
    }

private:
    Deviation(std::string event_id, std::variant<double, MissingDeviationReason> value)
        : event_id_(std::move(event_id)), value_(std::move(value)) {}

    std::string event_id_;
    std::variant<double, MissingDeviationReason> value_;
};

/// Deviation of one detection result against its manual annotation. A
/// missing model output takes precedence over the annotation kind; with an
/// estimate present, a no-braking or no-response annotation yields the
/// matching missing reason; otherwise the value is t_b minus the annotated
/// onset.
Deviation deviation(const OnsetResult& result, const Annotation& annotation);

/// One evaluated event: its deviation plus the confidence score of the
/// winning fit (absent when the pipeline produced no estimate).
struct EvalEvent {
    Deviation dev;
    std::optional<double> r2;
};

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fn + fp + tn; }
};

/// Small-difference events (|deviation| <= diff_threshold) are the actual
/// positives; r2 >= r2_threshold predicts positive. Events without a
/// numeric deviation are excluded.
ConfusionCounts classify(std::span<const EvalEvent> events, double diff_threshold,
                         double r2_threshold);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  ///< ordered by threshold
    double auc = 0.0;
};

/// Thresholds 0, step, ..., 1 inclusive.
std::vector<double> roc_thresholds(double step);

/// One (fpr, tpr) point per threshold, plus the trapezoidal area under the
/// fpr-sorted curve augmented with (0,0) and (1,1). Throws UndefinedRate
/// unless both an actual positive and an actual negative exist.
RocCurve roc_curve(std::span<const EvalEvent> events, double diff_threshold,
                   std::span<const double> thresholds);

/// Product-moment correlation. Throws DegenerateVariance when either input
/// is constant; requires equal lengths >= 2.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Ids of events whose windowed minimum acceleration is at or above the
/// threshold, i.e. too shallow to look like evasive braking.
std::vector<std::string> amin_filter(
    std::span<const std::pair<std::string, double>> windowed_amin, double threshold);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

/// Half-open zero-centered bins plus the shares of |deviation| within the
/// small and upper tolerance margins. Shares are absent for empty input.
struct DeviationHistogram {
    std::vector<HistogramBin> bins;
    std::optional<double> share_within_small;
    std::optional<double> share_within_upper;
};

DeviationHistogram deviation_histogram(std::span<const double> deviations, double bin_width,
                                       double small_threshold = 0.3,
                                       double upper_threshold = 0.5);

/// Aggregate evaluation knobs; defaults match the detection defaults.
struct EvalConfig {
    double diff_threshold = 0.3;  ///< seconds
    double r2_threshold = 0.5;    ///< headline confusion operating point
    double roc_step = 0.1;
    double hist_bin_width = 0.1;           ///< seconds
    std::optional<double> amin_threshold;  ///< m/s^2, filter off when unset
};

/// One evaluated event as fed to the batch summary.
struct EvalRecord {
    std::string event_id;
    Deviation deviation;
    std::optional<double> r2;
    std::optional<double> a_min;  ///< windowed minimum acceleration, when known
};

/// Batch-level evaluation report data.
struct EvalSummary {
    std::size_t n_records = 0;
    std::size_t n_numeric = 0;
    std::map<MissingDeviationReason, std::size_t> missing_by_reason;
    DeviationHistogram histogram;
    ConfusionCounts confusion;
    std::optional<RocCurve> roc;          ///< absent when a class is empty
    std::optional<double> pearson_r2_absdev;  ///< r2 vs |deviation|
    std::vector<std::string> amin_flagged;    ///< empty when the filter is off
};

EvalSummary summarize(std::span<const EvalRecord> records, const EvalConfig& cfg);

}  // namespace brakeonset
