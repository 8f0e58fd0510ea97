#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "brakeonset/evaluation.hpp"
#include "brakeonset/io.hpp"
#include "brakeonset/pipeline.hpp"
#include "brakeonset/synth.hpp"

namespace fs = std::filesystem;
using namespace brakeonset;

namespace {

constexpr const char* kConfigEnvVar = "BRAKEONSET_CONFIG";

struct CliDefaults {
    Config pipeline;
    EvalConfig eval;
    unsigned workers = 1;
};

/// Optional JSON config referenced by $BRAKEONSET_CONFIG; flags override it.
CliDefaults load_env_defaults() {
    CliDefaults defaults;
    const char* path = std::getenv(kConfigEnvVar);
    if (path == nullptr || *path == '\0') {
        return defaults;
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(std::string(kConfigEnvVar) + " points to unreadable file " +
                                 path);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("config file ") + path + ": " + e.what());
    }
    const auto get = [&](const char* key, double& target) {
        if (doc.contains(key)) {
            target = doc.at(key).get<double>();
        }
    };
    get("pre_offset", defaults.pipeline.window.pre_offset);
    get("horizon", defaults.pipeline.window.horizon);
    get("crash_cutoff", defaults.pipeline.window.crash_cutoff);
    get("a0_halfwidth", defaults.pipeline.grid.a0_halfwidth);
    get("a0_step", defaults.pipeline.grid.a0_step);
    get("tb_step", defaults.pipeline.grid.tb_step);
    get("jb_margin", defaults.pipeline.grid.jb_margin);
    get("jb_step", defaults.pipeline.grid.jb_step);
    get("diff_threshold", defaults.eval.diff_threshold);
    get("r2_threshold", defaults.eval.r2_threshold);
    get("roc_step", defaults.eval.roc_step);
    get("hist_bin_width", defaults.eval.hist_bin_width);
    if (doc.contains("amin_threshold") && !doc.at("amin_threshold").is_null()) {
        defaults.eval.amin_threshold = doc.at("amin_threshold").get<double>();
    }
    if (doc.contains("workers")) {
        defaults.workers = doc.at("workers").get<unsigned>();
    }
    return defaults;
}

void add_pipeline_flags(CLI::App* cmd, Config& cfg) {
    cmd->add_option("--pre-offset", cfg.window.pre_offset,
                    "Window start offset before t1, seconds")
        ->capture_default_str();
    cmd->add_option("--horizon", cfg.window.horizon,
                    "a_min search horizon after t1 for near-crashes, seconds")
        ->capture_default_str();
    cmd->add_option("--crash-cutoff", cfg.window.crash_cutoff,
                    "Seconds trimmed before the crash time")
        ->capture_default_str();
    cmd->add_option("--a0-halfwidth", cfg.grid.a0_halfwidth,
                    "a0 grid halfwidth around a_max, m/s^2")
        ->capture_default_str();
    cmd->add_option("--a0-step", cfg.grid.a0_step, "a0 grid step, m/s^2")
        ->capture_default_str();
    cmd->add_option("--tb-step", cfg.grid.tb_step, "t_b grid step, seconds")
        ->capture_default_str();
    cmd->add_option("--jb-margin", cfg.grid.jb_margin, "j_b grid margin below j_min, m/s^3")
        ->capture_default_str();
    cmd->add_option("--jb-step", cfg.grid.jb_step, "j_b grid step, m/s^3")
        ->capture_default_str();
}

int run_detect(const fs::path& manifest, const fs::path& out, const Config& cfg,
               unsigned workers) {
    const LoadedEvents loaded = load_events(manifest);
    const auto detections = run_batch_detailed(loaded.events, cfg, workers);
    ReportDoc doc;
    doc.entries = make_report_entries(detections, loaded.errors);
    write_report(out, doc);
    std::cerr << "detect: " << detections.size() << " events, " << loaded.errors.size()
              << " load errors -> " << out.string() << "\n";
    return loaded.errors.empty() ? 0 : 2;
}

int run_evaluate(const fs::path& manifest, const fs::path& report, const fs::path& out,
                 const EvalConfig& eval_cfg) {
    const LoadedEvents loaded = load_events(manifest);
    ReportDoc doc = read_report(report);
    const auto annotations = annotation_index(loaded.events);
    const std::vector<EvalRecord> records = apply_annotations(doc.entries, annotations);
    doc.eval_config = eval_cfg;
    doc.summary = summarize(records, eval_cfg);
    write_report(out, doc);
    std::cerr << "evaluate: " << records.size() << " scored records -> " << out.string()
              << "\n";
    const bool had_load_errors =
        std::any_of(doc.entries.begin(), doc.entries.end(),
                    [](const ReportEntry& e) { return e.load_error.has_value(); });
    return had_load_errors ? 2 : 0;
}

int run_roc(const fs::path& manifest, const fs::path& report, const fs::path& out,
            const EvalConfig& eval_cfg) {
    const LoadedEvents loaded = load_events(manifest);
    ReportDoc doc = read_report(report);
    const auto annotations = annotation_index(loaded.events);
    const std::vector<EvalRecord> records = apply_annotations(doc.entries, annotations);

    std::vector<EvalEvent> events;
    events.reserve(records.size());
    for (const EvalRecord& rec : records) {
        events.push_back({rec.deviation, rec.r2});
    }
    const RocCurve curve =
        roc_curve(events, eval_cfg.diff_threshold, roc_thresholds(eval_cfg.roc_step));

    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["diff_threshold"] = eval_cfg.diff_threshold;
    j["roc_step"] = eval_cfg.roc_step;
    j["points"] = nlohmann::ordered_json::array();
    for (const RocPoint& p : curve.points) {
        j["points"].push_back({{"threshold", p.threshold}, {"fpr", p.fpr}, {"tpr", p.tpr}});
    }
    j["auc"] = curve.auc;
    std::ofstream file(out, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot write " + out.string());
    }
    file << j.dump(2) << "\n";
    std::cerr << "roc: auc=" << curve.auc << " -> " << out.string() << "\n";
    return 0;
}

int run_plot(const fs::path& manifest, const std::string& event_id, const fs::path& out,
             const Config& cfg) {
    const LoadedEvents loaded = load_events(manifest);
    for (const LoadError& err : loaded.errors) {
        if (err.event_id == event_id) {
            throw std::runtime_error("event " + event_id + " failed to load: " + err.message);
        }
    }
    const auto found =
        std::find_if(loaded.events.begin(), loaded.events.end(),
                     [&](const ConflictEvent& e) { return e.event_id == event_id; });
    if (found == loaded.events.end()) {
        throw std::runtime_error("event " + event_id + " not in manifest");
    }
    const OnsetResult result = detect_brake_onset(*found, cfg);
    emit_plot_data(out, *found, result);
    std::cerr << "plot: " << event_id << " -> " << out.string() << "\n";
    return 0;
}

int run_synth(const fs::path& out_dir, const CorpusConfig& cfg) {
    const auto events = gen_corpus(cfg);
    const fs::path manifest = write_event_set(out_dir, events);
    std::cerr << "synth: " << events.size() << " events -> " << manifest.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        CliDefaults defaults = load_env_defaults();

        CLI::App app{"Brake onset estimation from longitudinal acceleration time series"};
        app.require_subcommand(1);

        // detect
        auto* detect = app.add_subcommand("detect", "Estimate brake onsets for a manifest");
        fs::path detect_manifest;
        fs::path detect_out;
        Config detect_cfg = defaults.pipeline;
        unsigned workers = defaults.workers;
        detect->add_option("--manifest", detect_manifest, "Event manifest JSON")
            ->required()
            ->check(CLI::ExistingFile);
        detect->add_option("--out", detect_out, "Report output path")->required();
        detect->add_option("--workers", workers, "Parallel workers")->capture_default_str();
        add_pipeline_flags(detect, detect_cfg);

        // evaluate
        auto* evaluate =
            app.add_subcommand("evaluate", "Score a detection report against annotations");
        fs::path eval_manifest;
        fs::path eval_report;
        fs::path eval_out;
        EvalConfig eval_cfg = defaults.eval;
        evaluate->add_option("--manifest", eval_manifest, "Event manifest JSON")
            ->required()
            ->check(CLI::ExistingFile);
        evaluate->add_option("--report", eval_report, "Detection report JSON")
            ->required()
            ->check(CLI::ExistingFile);
        evaluate->add_option("--out", eval_out, "Evaluation report output path")->required();
        evaluate->add_option("--diff-threshold", eval_cfg.diff_threshold,
                             "Small-difference tolerance, seconds")
            ->capture_default_str();
        evaluate->add_option("--r2-threshold", eval_cfg.r2_threshold,
                             "Headline confidence threshold")
            ->capture_default_str();
        evaluate->add_option("--roc-step", eval_cfg.roc_step, "ROC threshold step")
            ->capture_default_str();
        evaluate->add_option("--hist-bin-width", eval_cfg.hist_bin_width,
                             "Deviation histogram bin width, seconds")
            ->capture_default_str();
        std::optional<double> amin_threshold = eval_cfg.amin_threshold;
        evaluate->add_option(
            "--amin-threshold", amin_threshold,
            "Flag events with windowed a_min >= threshold, m/s^2 (off when omitted)");

        // roc
        auto* roc = app.add_subcommand("roc", "Write the ROC sweep for a report");
        fs::path roc_manifest;
        fs::path roc_report;
        fs::path roc_out;
        EvalConfig roc_cfg = defaults.eval;
        roc->add_option("--manifest", roc_manifest, "Event manifest JSON")
            ->required()
            ->check(CLI::ExistingFile);
        roc->add_option("--report", roc_report, "Detection report JSON")
            ->required()
            ->check(CLI::ExistingFile);
        roc->add_option("--out", roc_out, "ROC output path")->required();
        roc->add_option("--diff-threshold", roc_cfg.diff_threshold,
                        "Small-difference tolerance, seconds")
            ->capture_default_str();
        roc->add_option("--roc-step", roc_cfg.roc_step, "ROC threshold step")
            ->capture_default_str();

        // plot
        auto* plot = app.add_subcommand("plot", "Write per-event plot data");
        fs::path plot_manifest;
        std::string plot_event;
        fs::path plot_out;
        Config plot_cfg = defaults.pipeline;
        plot->add_option("--manifest", plot_manifest, "Event manifest JSON")
            ->required()
            ->check(CLI::ExistingFile);
        plot->add_option("--event-id", plot_event, "Event to plot")->required();
        plot->add_option("--out", plot_out, "Plot data output path")->required();
        add_pipeline_flags(plot, plot_cfg);

        // synth
        auto* synth = app.add_subcommand("synth", "Generate a synthetic event corpus");
        fs::path synth_dir;
        CorpusConfig corpus_cfg;
        corpus_cfg.n = 20;
        synth->add_option("--out-dir", synth_dir, "Output directory")->required();
        synth->add_option("--n", corpus_cfg.n, "Number of events")->capture_default_str();
        synth->add_option("--seed", corpus_cfg.seed, "Corpus seed")->capture_default_str();
        synth->add_option("--noise-sigma", corpus_cfg.noise_sigma,
                          "Gaussian noise sigma on braking events, m/s^2")
            ->capture_default_str();
        synth->add_option("--dt", corpus_cfg.dt, "Sample step, seconds")
            ->capture_default_str();
        synth->add_option("--total-duration", corpus_cfg.total_duration,
                          "Series length, seconds")
            ->capture_default_str();
        synth->add_option("--fraction-no-braking", corpus_cfg.fraction_no_braking,
                          "Fraction of flat no-braking events")
            ->capture_default_str();
        synth->add_option("--fraction-no-response", corpus_cfg.fraction_no_response,
                          "Fraction of flat no-response events")
            ->capture_default_str();
        synth->add_option("--flat-sigma", corpus_cfg.flat_sigma,
                          "Noise sigma of flat events, m/s^2")
            ->capture_default_str();
        synth->add_flag("--snap-to-grid", corpus_cfg.snap_to_grid,
                        "Snap true onsets to the detection grid lattice");

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 1;  // help/version exit clean, errors are structural
        }

        if (detect->parsed()) {
            return run_detect(detect_manifest, detect_out, detect_cfg, workers);
        }
        if (evaluate->parsed()) {
            eval_cfg.amin_threshold = amin_threshold;
            if (amin_threshold && !(*amin_threshold < 0.0)) {
                std::cerr << "warning: --amin-threshold " << *amin_threshold
                          << " is not negative; braking magnitudes are negative\n";
            }
            return run_evaluate(eval_manifest, eval_report, eval_out, eval_cfg);
        }
        if (roc->parsed()) {
            return run_roc(roc_manifest, roc_report, roc_out, roc_cfg);
        }
        if (plot->parsed()) {
            return run_plot(plot_manifest, plot_event, plot_out, plot_cfg);
        }
        if (synth->parsed()) {
            return run_synth(synth_dir, corpus_cfg);
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
