#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "brakeonset/kinematics.hpp"
#include "brakeonset/plm.hpp"

namespace brakeonset {

enum class Outcome { crash, near_crash };

enum class AgentType { passenger_car, motorcycle, bicycle, micromobility, pedestrian };

/// Manual ground-truth label for one event: an annotated brake onset time,
/// or the statement that the responder never braked / never responded.
class Annotation {
public:
    enum class Kind { brake_onset, no_braking, no_response };

    static Annotation brake_onset(double t) { return Annotation(Kind::brake_onset, t); }
    static Annotation no_braking() { return Annotation(Kind::no_braking, 0.0); }
    static Annotation no_response() { return Annotation(Kind::no_response, 0.0); }

    Kind kind() const { return kind_; }
    bool has_onset() const { return kind_ == Kind::brake_onset; }

    double onset_time() const {
        if (!has_onset()) {
            throw std::logic_error("annotation carries no onset time");
        }
        return onset_time_;
    }

private:
    Annotation(Kind kind, double t) : kind_(kind), onset_time_(t) {}

    Kind kind_;
    double onset_time_;
};

/// One crash or near-crash of a single responder.
struct ConflictEvent {
    std::string event_id;
    KinematicSeries series;
    double t1 = 0.0;  ///< stimulus onset, annotated externally
    Outcome outcome = Outcome::near_crash;
    std::optional<double> crash_time;  ///< required iff outcome == crash
    AgentType agent_type = AgentType::passenger_car;
    std::string scenario_type;
    std::optional<Annotation> annotation;
};

/// Checks the event invariants (t1 inside the series extent, crash_time
/// present exactly for crashes and later than t1, annotated onset inside
/// the extent). Throws std::invalid_argument on violation.
void validate(const ConflictEvent& event);

enum class MissingReason { no_model_output, empty_window, degenerate_signal };

const char* to_string(MissingReason reason);

/// A successful fit together with the window it was fitted on.
struct Estimate {
    PlmFit fit;
    double t_start = 0.0;
    double t_end = 0.0;
};

/// Per-event outcome: an estimate, or a typed reason why none was made.
class OnsetResult {
public:
    static OnsetResult make_estimate(std::string event_id, Estimate estimate) {
        return OnsetResult(std::move(event_id), std::move(estimate));
    }
    static OnsetResult make_missing(std::string event_id, MissingReason reason) {
        return OnsetResult(std::move(event_id), reason);
    }

    const std::string& event_id() const { return event_id_; }
    bool is_estimate() const { return std::holds_alternative<Estimate>(outcome_); }

    const Estimate& estimate() const {
        if (!is_estimate()) {
            throw std::logic_error("result for " + event_id_ + " carries no estimate");
        }
        return std::get<Estimate>(outcome_);
    }

    MissingReason missing_reason() const {
        if (is_estimate()) {
            throw std::logic_error("result for " + event_id_ + " is an estimate");
        }
        return std::get<MissingReason>(outcome_);
    }

private:
    OnsetResult(std::string event_id, std::variant<Estimate, MissingReason> outcome)
        : event_id_(std::move(event_id)), outcome_(std::move(outcome)) {}

    std::string event_id_;
    std::variant<Estimate, MissingReason> outcome_;
};

/// Fit-window parameters, defaults as used throughout.
struct WindowConfig {
    double pre_offset = 1.0;    ///< seconds before t1
    double horizon = 4.0;       ///< seconds after t1 (near-crash a_min search)
    double crash_cutoff = 0.2;  ///< seconds trimmed before the crash time
};

struct Config {
    WindowConfig window;
    GridConfig grid;
};

/// Derives the fit window of one event. t_start is t1 - pre_offset; t_end
/// is the earliest time of minimum acceleration over [t_start, t1 + horizon]
/// for near-crashes or [t_start, crash_time - crash_cutoff] for crashes
/// (boundary sample kept). Both interval ends clip to the series extent.
/// Throws EmptyWindow when the search interval holds fewer than two
/// samples, DegenerateVariance when the interval signal is constant, and
/// InvalidWindow when the minimum sits at t_start (signal never decreases).
std::pair<double, double> fit_window(const ConflictEvent& event, const WindowConfig& cfg);

/// Result of one detection plus the window statistics, when a window could
/// be derived. Stats are kept even when a later stage fails, so shallow
/// (likely non-braking) signals stay inspectable.
struct EventDetection {
    OnsetResult result;
    std::optional<WindowStats> stats;
};

/// Full per-event pipeline: window, slice, stats, grid, search. Any
/// data-shaped stage failure becomes a typed Missing result; only
/// structural errors (malformed event, bad configuration) propagate.
EventDetection detect_with_stats(const ConflictEvent& event, const Config& cfg);

OnsetResult detect_brake_onset(const ConflictEvent& event, const Config& cfg);

/// One result per event, sorted by event_id. Events are processed
/// independently; `workers` > 1 fans out over threads with output identical
/// to the sequential run. Throws DuplicateEventId on id collision.
std::vector<OnsetResult> run_batch(const std::vector<ConflictEvent>& events,
                                   const Config& cfg, unsigned workers = 1);

/// run_batch variant keeping the per-event window statistics.
std::vector<EventDetection> run_batch_detailed(const std::vector<ConflictEvent>& events,
                                               const Config& cfg, unsigned workers = 1);

}  // namespace brakeonset
