#include "brakeonset/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace brakeonset {

double GaussianSampler::next(double sigma) {
    if (sigma == 0.0) {
        // Keep the stream position independent of sigma toggling.
        return 0.0;
    }
    if (has_spare_) {
        has_spare_ = false;
        return spare_ * sigma;
    }
    // 53-bit uniforms; u1 shifted into (0, 1] so log() stays finite.
    const double u1 = 1.0 - static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle) * sigma;
}

double GaussianSampler::uniform(double lo, double hi) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

double sample_time(std::size_t i, double dt) {
    return static_cast<double>(i) * dt;
}

namespace {

void check_spec(const SynthSpec& spec) {
    if (!(spec.dt > 0.0)) {
        throw std::invalid_argument("synth dt must be positive");
    }
    if (!(spec.t_b >= 0.0) || !(spec.t_b <= spec.total_duration)) {
        throw std::invalid_argument("synth t_b must lie in [0, total_duration]");
    }
    if (!(spec.noise_sigma >= 0.0)) {
        throw std::invalid_argument("synth noise_sigma must be non-negative");
    }
    if (!(spec.ramp_duration > 0.0)) {
        throw std::invalid_argument("synth ramp_duration must be positive");
    }
    if (!(spec.j_b <= 0.0)) {
        throw std::invalid_argument("synth j_b must be <= 0");
    }
}

double ramp_profile(const SynthSpec& spec, double t) {
    if (t < spec.t_b) {
        return spec.a0;
    }
    return spec.a0 + spec.j_b * std::min(t - spec.t_b, spec.ramp_duration);
}

ConflictEvent assemble(const SynthSpec& spec, std::vector<Sample> samples) {
    ConflictEvent event{
        spec.event_id,
        KinematicSeries(std::move(samples)),
        spec.t1,
        spec.outcome,
        spec.crash_time,
        spec.agent_type,
        spec.scenario_type,
        Annotation::brake_onset(spec.t_b),
    };
    validate(event);
    return event;
}

}  // namespace

ConflictEvent gen_ramp_event(const SynthSpec& spec) {
    check_spec(spec);
    GaussianSampler noise(spec.seed);
    const auto n = static_cast<std::size_t>(std::llround(spec.total_duration / spec.dt)) + 1;
    std::vector<Sample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = sample_time(i, spec.dt);
        samples.push_back({t, ramp_profile(spec, t) + noise.next(spec.noise_sigma)});
    }
    return assemble(spec, std::move(samples));
}

ConflictEvent gen_prelude_event(const SynthSpec& spec, double prelude_jerk,
                                double prelude_start, double prelude_end) {
    check_spec(spec);
    if (!(prelude_start < prelude_end)) {
        throw std::invalid_argument("prelude interval must be non-empty");
    }
    if (prelude_end > spec.t_b) {
        throw std::invalid_argument("prelude must end at or before t_b");
    }
    GaussianSampler noise(spec.seed);
    const auto n = static_cast<std::size_t>(std::llround(spec.total_duration / spec.dt)) + 1;
    std::vector<Sample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = sample_time(i, spec.dt);
        double prelude = 0.0;
        if (t >= prelude_start) {
            prelude = prelude_jerk * (std::min(t, prelude_end) - prelude_start);
        }
        samples.push_back(
            {t, ramp_profile(spec, t) + prelude + noise.next(spec.noise_sigma)});
    }
    return assemble(spec, std::move(samples));
}

ConflictEvent gen_crash_spike(ConflictEvent event, double spike_accel, double spike_at) {
    if (!std::isfinite(spike_accel) || !std::isfinite(spike_at)) {
        throw std::invalid_argument("spike parameters must be finite");
    }
    std::vector<Sample> samples(event.series.samples().begin(), event.series.samples().end());
    for (Sample& s : samples) {
        if (s.t >= spike_at) {
            s.a = spike_accel;
        }
    }
    event.series = KinematicSeries(std::move(samples));
    event.outcome = Outcome::crash;
    event.crash_time = spike_at;
    validate(event);
    return event;
}

namespace {

// splitmix64, used to derive independent per-event seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string corpus_event_id(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "ev-%05zu", index);
    return buf;
}

ConflictEvent gen_flat_event(const CorpusConfig& cfg, std::size_t index,
                             std::uint64_t seed, bool responded) {
    GaussianSampler draw(seed);
    const double level = draw.uniform(cfg.flat_level.lo, cfg.flat_level.hi);
    const double t1 = draw.uniform(cfg.t1.lo, cfg.t1.hi);
    GaussianSampler noise(mix_seed(seed, 0x5157));
    const auto n = static_cast<std::size_t>(std::llround(cfg.total_duration / cfg.dt)) + 1;
    std::vector<Sample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = sample_time(i, cfg.dt);
        samples.push_back({t, level + noise.next(cfg.flat_sigma)});
    }
    ConflictEvent event{
        corpus_event_id(index),
        KinematicSeries(std::move(samples)),
        t1,
        Outcome::near_crash,
        std::nullopt,
        AgentType::passenger_car,
        "synthetic_flat",
        responded ? Annotation::no_braking() : Annotation::no_response(),
    };
    validate(event);
    return event;
}

ConflictEvent gen_braking_event(const CorpusConfig& cfg, std::size_t index,
                                std::uint64_t seed) {
    GaussianSampler draw(seed);
    SynthSpec spec;
    spec.event_id = corpus_event_id(index);
    spec.dt = cfg.dt;
    spec.total_duration = cfg.total_duration;
    spec.noise_sigma = cfg.noise_sigma;
    spec.seed = mix_seed(seed, 0xace5);
    spec.t1 = draw.uniform(cfg.t1.lo, cfg.t1.hi);
    spec.a0 = draw.uniform(cfg.a0.lo, cfg.a0.hi);
    spec.j_b = draw.uniform(cfg.j_b.lo, cfg.j_b.hi);
    double delay = draw.uniform(cfg.brake_delay.lo, cfg.brake_delay.hi);
    double ramp = draw.uniform(cfg.ramp_duration.lo, cfg.ramp_duration.hi);

    if (cfg.snap_to_grid) {
        // Put t_b on the very doubles the detection grid will enumerate and
        // the ramp end on a sample time, so a noiseless event is a perfect
        // member of the searched model family.
        const double t_start = spec.t1 - cfg.pre_offset;
        const auto k = static_cast<std::size_t>(
            std::max(1.0, std::round((spec.t1 + delay - t_start) / cfg.tb_step)));
        spec.t_b = grid_axis_value(t_start, k, cfg.tb_step);
        auto ramp_end_index =
            static_cast<std::size_t>(std::ceil((spec.t_b + ramp) / cfg.dt));
        while (sample_time(ramp_end_index, cfg.dt) <= spec.t_b + 0.5 * cfg.dt) {
            ++ramp_end_index;
        }
        spec.ramp_duration = sample_time(ramp_end_index, cfg.dt) - spec.t_b;
    } else {
        spec.t_b = spec.t1 + delay;
        spec.ramp_duration = ramp;
    }
    return gen_ramp_event(spec);
}

}  // namespace

std::vector<ConflictEvent> gen_corpus(const CorpusConfig& cfg) {
    if (cfg.fraction_no_braking < 0.0 || cfg.fraction_no_response < 0.0 ||
        cfg.fraction_no_braking + cfg.fraction_no_response > 1.0) {
        throw std::invalid_argument("corpus fractions must be non-negative and sum to <= 1");
    }
    const auto n_no_braking =
        static_cast<std::size_t>(std::llround(cfg.fraction_no_braking * cfg.n));
    const auto n_no_response =
        static_cast<std::size_t>(std::llround(cfg.fraction_no_response * cfg.n));

    std::vector<ConflictEvent> events;
    events.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const std::uint64_t seed = mix_seed(cfg.seed, i);
        if (i < n_no_braking) {
            events.push_back(gen_flat_event(cfg, i, seed, /*responded=*/true));
        } else if (i < n_no_braking + n_no_response) {
            events.push_back(gen_flat_event(cfg, i, seed, /*responded=*/false));
        } else {
            events.push_back(gen_braking_event(cfg, i, seed));
        }
    }
    return events;
}

}  // namespace brakeonset
