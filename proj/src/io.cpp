#include "brakeonset/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include <json.hpp>

namespace brakeonset {

using ordered_json = nlohmann::ordered_json;

const char* to_string(Outcome outcome) {
    return outcome == Outcome::crash ? "crash" : "near_crash";
}

Outcome outcome_from_string(const std::string& s) {
    if (s == "crash") {
        return Outcome::crash;
    }
    if (s == "near_crash") {
        return Outcome::near_crash;
    }
    throw ManifestParseError("unknown outcome '" + s + "'");
}

const char* to_string(AgentType agent_type) {
    switch (agent_type) {
        case AgentType::passenger_car: return "passenger_car";
        case AgentType::motorcycle: return "motorcycle";
        case AgentType::bicycle: return "bicycle";
        case AgentType::micromobility: return "micromobility";
        case AgentType::pedestrian: return "pedestrian";
    }
    return "passenger_car";
}

AgentType agent_type_from_string(const std::string& s) {
    if (s == "passenger_car") return AgentType::passenger_car;
    if (s == "motorcycle") return AgentType::motorcycle;
    if (s == "bicycle") return AgentType::bicycle;
    if (s == "micromobility") return AgentType::micromobility;
    if (s == "pedestrian") return AgentType::pedestrian;
    throw ManifestParseError("unknown agent_type '" + s + "'");
}

std::string format_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw std::invalid_argument("unformattable double");
    }
    return std::string(buf, end);
}

namespace {

double parse_double(std::string_view text, const std::string& where) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw SeriesError("bad number '" + std::string(text) + "' in " + where);
    }
    return value;
}

std::string strip(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

KinematicSeries read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SeriesError("cannot open series file " + path.string());
    }
    std::string line;
    bool saw_header = false;
    std::vector<Sample> samples;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = strip(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        if (!saw_header) {
            if (text != "t,accel") {
                throw SeriesError("expected header 't,accel' in " + path.string());
            }
            saw_header = true;
            continue;
        }
        const auto comma = text.find(',');
        if (comma == std::string::npos) {
            throw SeriesError("missing comma at " + path.string() + ":" +
                              std::to_string(line_no));
        }
        const std::string where = path.string() + ":" + std::to_string(line_no);
        samples.push_back({parse_double(strip(text.substr(0, comma)), where),
                           parse_double(strip(text.substr(comma + 1)), where)});
    }
    if (!saw_header) {
        throw SeriesError("empty series file " + path.string());
    }
    return KinematicSeries(std::move(samples));
}

void write_series_csv(const std::filesystem::path& path, const KinematicSeries& series) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "# format_version: " << kFormatVersion << "\n";
    out << "t,accel\n";
    for (const Sample& s : series.samples()) {
        out << format_double(s.t) << ',' << format_double(s.a) << "\n";
    }
}

namespace {

Annotation annotation_from_json(const ordered_json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "brake_onset") {
        return Annotation::brake_onset(j.at("t").get<double>());
    }
    if (kind == "no_braking") {
        return Annotation::no_braking();
    }
    if (kind == "no_response") {
        return Annotation::no_response();
    }
    throw ManifestParseError("unknown annotation kind '" + kind + "'");
}

ordered_json annotation_to_json(const Annotation& annotation) {
    ordered_json j;
    switch (annotation.kind()) {
        case Annotation::Kind::brake_onset:
            j["kind"] = "brake_onset";
            j["t"] = annotation.onset_time();
            break;
        case Annotation::Kind::no_braking:
            j["kind"] = "no_braking";
            break;
        case Annotation::Kind::no_response:
            j["kind"] = "no_response";
            break;
    }
    return j;
}

}  // namespace

LoadedEvents load_events(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw ManifestParseError("cannot open manifest " + manifest_path.string());
    }
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ManifestParseError("manifest " + manifest_path.string() + ": " + e.what());
    }

    LoadedEvents loaded;
    const std::filesystem::path base = manifest_path.parent_path();
    try {
        if (doc.at("format_version").get<int>() != kFormatVersion) {
            throw ManifestParseError("unsupported manifest format_version in " +
                                     manifest_path.string());
        }
        std::vector<std::string> ids;
        for (const ordered_json& entry : doc.at("events")) {
            const std::string event_id = entry.at("event_id").get<std::string>();
            ids.push_back(event_id);
            try {
                KinematicSeries series =
                    read_series_csv(base / entry.at("series").get<std::string>());
                const Outcome outcome =
                    outcome_from_string(entry.at("outcome").get<std::string>());
                std::optional<double> crash_time;
                if (entry.contains("crash_time")) {
                    crash_time = entry.at("crash_time").get<double>();
                }
                std::optional<Annotation> annotation;
                if (entry.contains("annotation")) {
                    annotation = annotation_from_json(entry.at("annotation"));
                }
                ConflictEvent event{
                    event_id,
                    std::move(series),
                    entry.at("t1").get<double>(),
                    outcome,
                    crash_time,
                    agent_type_from_string(entry.at("agent_type").get<std::string>()),
                    entry.value("scenario_type", std::string{}),
                    annotation,
                };
                validate(event);
                loaded.events.push_back(std::move(event));
            } catch (const std::exception& e) {
                loaded.errors.push_back({event_id, e.what()});
            }
        }
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
            throw ManifestParseError("duplicate event ids in " + manifest_path.string());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ManifestParseError("manifest " + manifest_path.string() + ": " + e.what());
    }
    return loaded;
}

std::filesystem::path write_event_set(const std::filesystem::path& dir,
                                      std::span<const ConflictEvent> events) {
    const auto safe = [](const std::string& id) {
        return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                   c == '.';
        });
    };
    std::filesystem::create_directories(dir / "series");
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["events"] = ordered_json::array();
    for (const ConflictEvent& event : events) {
        if (!safe(event.event_id)) {
            throw std::invalid_argument("event id '" + event.event_id +
                                        "' is not filename-safe");
        }
        const std::string rel = "series/" + event.event_id + ".csv";
        write_series_csv(dir / rel, event.series);
        ordered_json entry;
        entry["event_id"] = event.event_id;
        entry["series"] = rel;
        entry["t1"] = event.t1;
        entry["outcome"] = to_string(event.outcome);
        if (event.crash_time) {
            entry["crash_time"] = *event.crash_time;
        }
        entry["agent_type"] = to_string(event.agent_type);
        entry["scenario_type"] = event.scenario_type;
        if (event.annotation) {
            entry["annotation"] = annotation_to_json(*event.annotation);
        }
        doc["events"].push_back(std::move(entry));
    }
    const std::filesystem::path manifest_path = dir / "manifest.json";
    std::ofstream out(manifest_path);
    if (!out) {
        throw std::runtime_error("cannot write " + manifest_path.string());
    }
    out << doc.dump(2) << "\n";
    return manifest_path;
}

std::vector<ReportEntry> make_report_entries(std::span<const EventDetection> detections,
                                             std::span<const LoadError> load_errors) {
    std::vector<ReportEntry> entries;
    entries.reserve(detections.size() + load_errors.size());
    for (const EventDetection& d : detections) {
        ReportEntry entry;
        entry.event_id = d.result.event_id();
        entry.stats = d.stats;
        if (d.result.is_estimate()) {
            entry.estimate = d.result.estimate();
        } else {
            entry.missing_reason = d.result.missing_reason();
        }
        entries.push_back(std::move(entry));
    }
    for (const LoadError& e : load_errors) {
        ReportEntry entry;
        entry.event_id = e.event_id;
        entry.load_error = e.message;
        entry.missing_deviation = MissingDeviationReason::incomplete_series;
        entries.push_back(std::move(entry));
    }
    std::sort(entries.begin(), entries.end(),
              [](const ReportEntry& a, const ReportEntry& b) {
                  return a.event_id < b.event_id;
              });
    return entries;
}

std::map<std::string, Annotation> annotation_index(std::span<const ConflictEvent> events) {
    std::map<std::string, Annotation> index;
    for (const ConflictEvent& event : events) {
        if (event.annotation) {
            index.emplace(event.event_id, *event.annotation);
        }
    }
    return index;
}

namespace {

OnsetResult result_from_entry(const ReportEntry& entry) {
    if (entry.estimate) {
        return OnsetResult::make_estimate(entry.event_id, *entry.estimate);
    }
    return OnsetResult::make_missing(entry.event_id, *entry.missing_reason);
}

}  // namespace

std::vector<EvalRecord> apply_annotations(
    std::vector<ReportEntry>& entries, const std::map<std::string, Annotation>& annotations) {
    std::vector<EvalRecord> records;
    for (ReportEntry& entry : entries) {
        if (entry.load_error) {
            entry.missing_deviation = MissingDeviationReason::incomplete_series;
            records.push_back(
                {entry.event_id,
                 Deviation::missing(entry.event_id, MissingDeviationReason::incomplete_series),
                 std::nullopt, std::nullopt});
            continue;
        }
        const auto found = annotations.find(entry.event_id);
        if (found == annotations.end()) {
            continue;  // no ground truth: the row stays, but it cannot be scored
        }
        const Deviation dev = deviation(result_from_entry(entry), found->second);
        if (dev.is_numeric()) {
            entry.deviation_s = dev.seconds();
        } else {
            entry.missing_deviation = dev.missing_reason();
        }
        std::optional<double> r2;
        if (entry.estimate) {
            r2 = entry.estimate->fit.r2;
        }
        std::optional<double> a_min;
        if (entry.stats) {
            a_min = entry.stats->a_min;
        }
        records.push_back({entry.event_id, dev, r2, a_min});
    }
    return records;
}

namespace {

ordered_json entry_to_json(const ReportEntry& entry) {
    ordered_json j;
    j["event_id"] = entry.event_id;
    if (entry.load_error) {
        j["status"] = "load_error";
        j["message"] = *entry.load_error;
    } else if (entry.estimate) {
        j["status"] = "estimate";
        j["a0"] = entry.estimate->fit.params.a0;
        j["t_b"] = entry.estimate->fit.params.t_b;
        j["j_b"] = entry.estimate->fit.params.j_b;
        j["r2"] = entry.estimate->fit.r2;
        j["window"] = {{"t_start", entry.estimate->t_start},
                       {"t_end", entry.estimate->t_end}};
    } else {
        j["status"] = "missing";
        j["missing_reason"] = to_string(*entry.missing_reason);
    }
    if (entry.stats) {
        j["window_stats"] = {{"a_max", entry.stats->a_max},
                             {"a_min", entry.stats->a_min},
                             {"t_of_a_min", entry.stats->t_of_a_min},
                             {"j_min", entry.stats->j_min},
                             {"sample_count", entry.stats->sample_count}};
    }
    if (entry.deviation_s) {
        j["deviation"] = *entry.deviation_s;
    } else if (entry.missing_deviation) {
        j["missing_deviation_reason"] = to_string(*entry.missing_deviation);
    }
    return j;
}

ReportEntry entry_from_json(const ordered_json& j) {
    ReportEntry entry;
    entry.event_id = j.at("event_id").get<std::string>();
    const std::string status = j.at("status").get<std::string>();
    if (status == "load_error") {
        entry.load_error = j.at("message").get<std::string>();
    } else if (status == "estimate") {
        Estimate e;
        e.fit.params.a0 = j.at("a0").get<double>();
        e.fit.params.t_b = j.at("t_b").get<double>();
        e.fit.params.j_b = j.at("j_b").get<double>();
        e.fit.r2 = j.at("r2").get<double>();
        e.t_start = j.at("window").at("t_start").get<double>();
        e.t_end = j.at("window").at("t_end").get<double>();
        entry.estimate = e;
    } else if (status == "missing") {
        const std::string reason = j.at("missing_reason").get<std::string>();
        if (reason == "no_model_output") {
            entry.missing_reason = MissingReason::no_model_output;
        } else if (reason == "empty_window") {
            entry.missing_reason = MissingReason::empty_window;
        } else if (reason == "degenerate_signal") {
            entry.missing_reason = MissingReason::degenerate_signal;
        } else {
            throw ManifestParseError("unknown missing_reason '" + reason + "'");
        }
    } else {
        throw ManifestParseError("unknown report row status '" + status + "'");
    }
    if (j.contains("window_stats")) {
        const ordered_json& s = j.at("window_stats");
        WindowStats stats;
        stats.a_max = s.at("a_max").get<double>();
        stats.a_min = s.at("a_min").get<double>();
        stats.t_of_a_min = s.at("t_of_a_min").get<double>();
        stats.j_min = s.at("j_min").get<double>();
        stats.sample_count = s.at("sample_count").get<std::size_t>();
        entry.stats = stats;
    }
    if (j.contains("deviation")) {
        entry.deviation_s = j.at("deviation").get<double>();
    }
    return entry;
}

ordered_json histogram_to_json(const DeviationHistogram& hist) {
    ordered_json j;
    j["bins"] = ordered_json::array();
    for (const HistogramBin& bin : hist.bins) {
        j["bins"].push_back({{"lo", bin.lo}, {"hi", bin.hi}, {"count", bin.count}});
    }
    j["share_within_0_3_s"] =
        hist.share_within_small ? ordered_json(*hist.share_within_small) : ordered_json();
    j["share_within_0_5_s"] =
        hist.share_within_upper ? ordered_json(*hist.share_within_upper) : ordered_json();
    return j;
}

ordered_json summary_to_json(const EvalSummary& summary) {
    ordered_json j;
    j["n_records"] = summary.n_records;
    j["n_numeric_deviations"] = summary.n_numeric;
    ordered_json missing = ordered_json::object();
    for (const auto& [reason, count] : summary.missing_by_reason) {
        missing[to_string(reason)] = count;
    }
    j["missing_deviations_by_reason"] = std::move(missing);
    j["histogram"] = histogram_to_json(summary.histogram);
    j["confusion"] = {{"tp", summary.confusion.tp},
                      {"fn", summary.confusion.fn},
                      {"fp", summary.confusion.fp},
                      {"tn", summary.confusion.tn}};
    if (summary.roc) {
        ordered_json roc;
        roc["points"] = ordered_json::array();
        for (const RocPoint& p : summary.roc->points) {
            roc["points"].push_back(
                {{"threshold", p.threshold}, {"fpr", p.fpr}, {"tpr", p.tpr}});
        }
        roc["auc"] = summary.roc->auc;
        j["roc"] = std::move(roc);
    } else {
        j["roc"] = nullptr;
    }
    j["pearson_r"] = summary.pearson_r2_absdev ? ordered_json(*summary.pearson_r2_absdev)
                                               : ordered_json();
    j["amin_flagged"] = summary.amin_flagged;
    return j;
}

}  // namespace

std::string report_to_string(const ReportDoc& doc) {
    ordered_json j;
    j["format_version"] = kFormatVersion;
    j["events"] = ordered_json::array();
    std::size_t n_estimates = 0;
    std::size_t n_missing = 0;
    std::size_t n_load_errors = 0;
    for (const ReportEntry& entry : doc.entries) {
        j["events"].push_back(entry_to_json(entry));
        if (entry.load_error) {
            ++n_load_errors;
        } else if (entry.estimate) {
            ++n_estimates;
        } else {
            ++n_missing;
        }
    }
    j["counts"] = {{"events", doc.entries.size()},
                   {"estimates", n_estimates},
                   {"missing", n_missing},
                   {"load_errors", n_load_errors}};
    if (doc.eval_config) {
        ordered_json cfg;
        cfg["diff_threshold"] = doc.eval_config->diff_threshold;
        cfg["r2_threshold"] = doc.eval_config->r2_threshold;
        cfg["roc_step"] = doc.eval_config->roc_step;
        cfg["hist_bin_width"] = doc.eval_config->hist_bin_width;
        cfg["amin_threshold"] = doc.eval_config->amin_threshold
                                    ? ordered_json(*doc.eval_config->amin_threshold)
                                    : ordered_json();
        j["evaluation_config"] = std::move(cfg);
    }
    if (doc.summary) {
        j["evaluation"] = summary_to_json(*doc.summary);
    }
    return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const ReportDoc& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << report_to_string(doc);
}

ReportDoc read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ManifestParseError("cannot open report " + path.string());
    }
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ManifestParseError("report " + path.string() + ": " + e.what());
    }
    ReportDoc doc;
    try {
        if (j.at("format_version").get<int>() != kFormatVersion) {
            throw ManifestParseError("unsupported report format_version in " + path.string());
        }
        for (const ordered_json& entry : j.at("events")) {
            doc.entries.push_back(entry_from_json(entry));
        }
        if (j.contains("evaluation_config")) {
            EvalConfig cfg;
            const ordered_json& c = j.at("evaluation_config");
            cfg.diff_threshold = c.at("diff_threshold").get<double>();
            cfg.r2_threshold = c.at("r2_threshold").get<double>();
            cfg.roc_step = c.at("roc_step").get<double>();
            cfg.hist_bin_width = c.at("hist_bin_width").get<double>();
            if (!c.at("amin_threshold").is_null()) {
                cfg.amin_threshold = c.at("amin_threshold").get<double>();
            }
            doc.eval_config = cfg;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ManifestParseError("report " + path.string() + ": " + e.what());
    }
    return doc;
}

void emit_plot_data(std::ostream& out, const ConflictEvent& event,
                    const OnsetResult& result) {
    out << "# format_version: " << kFormatVersion << "\n";
    out << "t,a_observed,a_fitted,marker\n";
    const Estimate* estimate = result.is_estimate() ? &result.estimate() : nullptr;
    for (const Sample& s : event.series.samples()) {
        out << format_double(s.t) << ',' << format_double(s.a) << ',';
        if (estimate && s.t >= estimate->t_start && s.t <= estimate->t_end) {
            out << format_double(plm_predict(estimate->fit.params, s.t));
        }
        out << ",\n";
    }
    out << format_double(event.t1) << ",,,t1\n";
    if (estimate) {
        out << format_double(estimate->t_start) << ",,,window_start\n";
        out << format_double(estimate->t_end) << ",,,window_end\n";
        out << format_double(estimate->fit.params.t_b) << ",,,t_b\n";
    }
    if (event.crash_time) {
        out << format_double(*event.crash_time) << ",,,crash_time\n";
    }
}

void emit_plot_data(const std::filesystem::path& path, const ConflictEvent& event,
                    const OnsetResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    emit_plot_data(out, event, result);
}

}  // namespace brakeonset
