#include "brakeonset/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace brakeonset {

const char* to_string(MissingReason reason) {
    switch (reason) {
        case MissingReason::no_model_output: return "no_model_output";
        case MissingReason::empty_window: return "empty_window";
        case MissingReason::degenerate_signal: return "degenerate_signal";
    }
    return "unknown";
}

void validate(const ConflictEvent& event) {
    if (event.event_id.empty()) {
        throw std::invalid_argument("event id must not be empty");
    }
    if (!event.series.contains_time(event.t1)) {
        throw std::invalid_argument("t1 outside series extent for " + event.event_id);
    }
    const bool is_crash = event.outcome == Outcome::crash;
    if (is_crash != event.crash_time.has_value()) {
        throw std::invalid_argument("crash_time must be present exactly for crashes: " +
                                    event.event_id);
    }
    if (event.crash_time && !(*event.crash_time > event.t1)) {
        throw std::invalid_argument("crash_time must be later than t1 for " + event.event_id);
    }
    if (event.annotation && event.annotation->has_onset() &&
        !event.series.contains_time(event.annotation->onset_time())) {
        throw std::invalid_argument("annotated onset outside series extent for " +
                                    event.event_id);
    }
}

std::pair<double, double> fit_window(const ConflictEvent& event, const WindowConfig& cfg) {
    const KinematicSeries& series = event.series;

    double t_start = event.t1 - cfg.pre_offset;
    if (t_start < series.front().t) {
        t_start = series.front().t;  // logs often begin shortly before the conflict
    }

    double search_end = event.outcome == Outcome::crash
                            ? *event.crash_time - cfg.crash_cutoff
                            : event.t1 + cfg.horizon;
    if (search_end > series.back().t) {
        search_end = series.back().t;
    }

    std::size_t inside = 0;
    for (const Sample& s : series.samples()) {
        if (s.t > search_end) {
            break;
        }
        if (s.t >= t_start) {
            ++inside;
        }
    }
    if (inside < 2) {
        throw EmptyWindow("a_min search interval holds " + std::to_string(inside) +
                          " samples for " + event.event_id);
    }

    const Sample minimum = argmin_accel(series, t_start, search_end);
    if (!(minimum.t > t_start)) {
        // The earliest minimum can only sit at the very start when the
        // signal never decreases; tell a constant signal apart from a
        // rising one.
        if (max_accel(series, t_start, search_end) == minimum.a) {
            throw DegenerateVariance("signal constant over the a_min search interval for " +
                                     event.event_id);
        }
        throw InvalidWindow("minimum acceleration at window start for " + event.event_id);
    }
    return {t_start, minimum.t};
}

EventDetection detect_with_stats(const ConflictEvent& event, const Config& cfg) {
    validate(event);

    double t_start = 0.0;
    double t_end = 0.0;
    try {
        std::tie(t_start, t_end) = fit_window(event, cfg.window);
    } catch (const EmptyWindow&) {
        return {OnsetResult::make_missing(event.event_id, MissingReason::empty_window),
                std::nullopt};
    } catch (const InvalidWindow&) {
        return {OnsetResult::make_missing(event.event_id, MissingReason::empty_window),
                std::nullopt};
    } catch (const DegenerateVariance&) {
        return {OnsetResult::make_missing(event.event_id, MissingReason::degenerate_signal),
                std::nullopt};
    }

    std::optional<WindowStats> stats;
    std::optional<KinematicSeries> window;
    try {
        stats = window_stats(event.series, t_start, t_end);
        window = slice_window(event.series, t_start, t_end);
    } catch (const EmptyWindow&) {
        // The fit window itself can hold a single sample even when the
        // a_min search interval held two or more.
        return {OnsetResult::make_missing(event.event_id, MissingReason::empty_window),
                std::nullopt};
    }

    GridSpec grid;
    try {
        grid = build_grid(*stats, t_start, t_end, cfg.grid);
    } catch (const EmptyGrid&) {
        return {OnsetResult::make_missing(event.event_id, MissingReason::no_model_output),
                stats};
    }

    try {
        PlmFit fit = grid_search(*window, grid);
        return {OnsetResult::make_estimate(event.event_id, Estimate{fit, t_start, t_end}),
                stats};
    } catch (const DegenerateVariance&) {
        return {OnsetResult::make_missing(event.event_id, MissingReason::degenerate_signal),
                stats};
    }
}

OnsetResult detect_brake_onset(const ConflictEvent& event, const Config& cfg) {
    return detect_with_stats(event, cfg).result;
}

namespace {

void check_unique_ids(const std::vector<ConflictEvent>& events) {
    std::set<std::string> seen;
    for (const ConflictEvent& e : events) {
        if (!seen.insert(e.event_id).second) {
            throw DuplicateEventId("duplicate event id " + e.event_id);
        }
    }
}

}  // namespace

std::vector<EventDetection> run_batch_detailed(const std::vector<ConflictEvent>& events,
                                               const Config& cfg, unsigned workers) {
    check_unique_ids(events);
    if (workers == 0) {
        workers = 1;
    }

    std::vector<std::optional<EventDetection>> slots(events.size());
    if (workers == 1 || events.size() <= 1) {
        for (std::size_t i = 0; i < events.size(); ++i) {
            slots[i] = detect_with_stats(events[i], cfg);
        }
    } else {
        // Each event writes only its own slot; any structural error is
        // rethrown after join.
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&] {
            for (std::size_t i = next.fetch_add(1); i < events.size();
                 i = next.fetch_add(1)) {
                try {
                    slots[i] = detect_with_stats(events[i], cfg);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        const unsigned n = std::min<std::size_t>(workers, events.size());
        pool.reserve(n);
        for (unsigned w = 0; w < n; ++w) {
            pool.emplace_back(work);
        }
        for (std::thread& t : pool) {
            t.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    std::vector<EventDetection> results;
    results.reserve(events.size());
    for (auto& slot : slots) {
        results.push_back(std::move(*slot));
    }
    std::sort(results.begin(), results.end(),
              [](const EventDetection& a, const EventDetection& b) {
                  return a.result.event_id() < b.result.event_id();
              });
    return results;
}

std::vector<OnsetResult> run_batch(const std::vector<ConflictEvent>& events,
                                   const Config& cfg, unsigned workers) {
    std::vector<EventDetection> detailed = run_batch_detailed(events, cfg, workers);
    std::vector<OnsetResult> results;
    results.reserve(detailed.size());
    for (EventDetection& d : detailed) {
        results.push_back(std::move(d.result));
    }
    return results;
}

}  // namespace brakeonset
