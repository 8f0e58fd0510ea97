#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brakeonset/evaluation.hpp"
#include "brakeonset/pipeline.hpp"

namespace brakeonset {

/// Version stamped into every file this library writes.
inline constexpr int kFormatVersion = 1;

const char* to_string(Outcome outcome);
const char* to_string(AgentType agent_type);
Outcome outcome_from_string(const std::string& s);
AgentType agent_type_from_string(const std::string& s);

/// Shortest decimal form that round-trips the exact double.
std::string format_double(double v);

/// Two-column `t,accel` CSV, strictly increasing t, seconds and m/s^2.
/// Lines starting with '#' are skipped. Throws SeriesError on any problem.
KinematicSeries read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, const KinematicSeries& series);

struct LoadError {
    std::string event_id;
    std::string message;
};

struct LoadedEvents {
    std::vector<ConflictEvent> events;
    std::vector<LoadError> errors;  ///< per-event failures, batch continues
};

/// Parses a manifest document and every referenced series file. Series
/// paths resolve relative to the manifest directory. A malformed manifest
/// throws ManifestParseError; per-event failures (unreadable or invalid
/// series, violated event invariants) are collected instead so the rest of
/// the batch still loads.
LoadedEvents load_events(const std::filesystem::path& manifest_path);

/// Writes dir/manifest.json plus one `series/<event_id>.csv` per event.
/// Returns the manifest path. Event ids must be filename-safe
/// ([A-Za-z0-9_.-]).
std::filesystem::path write_event_set(const std::filesystem::path& dir,
                                      std::span<const ConflictEvent> events);

/// One report row: an estimate, a typed missing result, or a load failure,
/// plus evaluation fields once annotations were applied.
struct ReportEntry {
    std::string event_id;
    std::optional<Estimate> estimate;
    std::optional<WindowStats> stats;
    std::optional<MissingReason> missing_reason;
    std::optional<std::string> load_error;
    std::optional<double> deviation_s;
    std::optional<MissingDeviationReason> missing_deviation;
};

struct ReportDoc {
    std::vector<ReportEntry> entries;       ///< sorted by event_id
    std::optional<EvalConfig> eval_config;  ///< present on evaluation reports
    std::optional<EvalSummary> summary;
};

/// Rows for a finished detection batch merged with its load failures,
/// sorted by event_id.
std::vector<ReportEntry> make_report_entries(std::span<const EventDetection> detections,
                                             std::span<const LoadError> load_errors);

std::map<std::string, Annotation> annotation_index(std::span<const ConflictEvent> events);

/// Scores report rows against manual annotations, writing the deviation
/// fields in place, and returns the records feeding the batch evaluation.
/// Rows without an annotation stay unscored; load-error rows score as
/// incomplete series.
std::vector<EvalRecord> apply_annotations(
    std::vector<ReportEntry>& entries, const std::map<std::string, Annotation>& annotations);

/// Deterministic JSON serialization: stable key order, shortest round-trip
/// numbers, two-space indent. Same inputs give identical bytes.
void write_report(const std::filesystem::path& path, const ReportDoc& doc);
std::string report_to_string(const ReportDoc& doc);

/// Reads the per-event rows (and evaluation config, when present) back.
ReportDoc read_report(const std::filesystem::path& path);

/// Per-event plot table: `t,a_observed,a_fitted,marker` rows with the
/// fitted model evaluated inside the window only, followed by one marker
/// row each for t1, the window bounds, t_b and the crash time (as
/// applicable).
void emit_plot_data(std::ostream& out, const ConflictEvent& event, const OnsetResult& result);
void emit_plot_data(const std::filesystem::path& path, const ConflictEvent& event,
                    const OnsetResult& result);

}  // namespace brakeonset
