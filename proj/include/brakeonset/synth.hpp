#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "brakeonset/pipeline.hpp"

namespace brakeonset {

/// Deterministic Gaussian sampler (Box-Muller over mt19937_64). Hand-rolled
/// so the same seed yields the same stream on every platform.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    double next(double sigma);
    double uniform(double lo, double hi);

private:
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Recipe for one single-ramp braking event: constant a0 until t_b, then a
/// ramp of slope j_b for ramp_duration seconds, then a plateau, with
/// optional zero-mean Gaussian noise.
struct SynthSpec {
    std::string event_id = "synth";
    double a0 = 0.0;            ///< m/s^2
    double t_b = 3.0;           ///< seconds
    double j_b = -3.0;          ///< m/s^3
    double ramp_duration = 1.0; ///< seconds
    double dt = 0.1;            ///< seconds
    double total_duration = 10.0;
    double noise_sigma = 0.0;   ///< m/s^2
    double t1 = 2.0;            ///< seconds
    Outcome outcome = Outcome::near_crash;
    std::optional<double> crash_time;
    std::uint64_t seed = 0;
    AgentType agent_type = AgentType::passenger_car;
    std::string scenario_type = "synthetic";
};

/// Time of the i-th generated sample. Out of line so every consumer of the
/// sample lattice sees bit-identical values.
double sample_time(std::size_t i, double dt);

/// Ramp-then-plateau event with annotation brake_onset(t_b). Deterministic
/// per seed.
ConflictEvent gen_ramp_event(const SynthSpec& spec);

/// Like gen_ramp_event, with a mild deceleration ramp of slope prelude_jerk
/// superimposed over [prelude_start, prelude_end] (held afterwards). Models
/// an intentional early slow-down before the evasive response; requires
/// prelude_end <= t_b. The annotation stays at the true evasive t_b.
ConflictEvent gen_prelude_event(const SynthSpec& spec, double prelude_jerk,
                                double prelude_start, double prelude_end);

/// Overwrites all samples at t >= spike_at with spike_accel and marks the
/// event as a crash at spike_at. A spike_at beyond the series leaves the
/// samples untouched.
ConflictEvent gen_crash_spike(ConflictEvent event, double spike_accel, double spike_at);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Parameter distributions for a generated corpus. Braking events draw
/// uniformly from the ranges; the configured fractions become flat
/// no-braking / no-response events instead.
struct CorpusConfig {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double dt = 0.1;
    double total_duration = 12.0;
    double noise_sigma = 0.0;
    Range t1{2.0, 3.0};
    Range a0{-0.2, 0.4};
    Range brake_delay{0.3, 2.0};     ///< t_b - t1
    Range j_b{-4.0, -1.0};
    Range ramp_duration{0.5, 1.5};
    double fraction_no_braking = 0.0;
    double fraction_no_response = 0.0;
    double flat_sigma = 0.05;        ///< noise of no-braking/no-response signals
    Range flat_level{-0.1, 0.3};     ///< base acceleration of flat signals

    /// When set, t_b snaps onto the detection grid lattice
    /// (t1 - pre_offset + k*tb_step) and the ramp end onto the sample
    /// lattice, so noiseless events are exactly recoverable.
    bool snap_to_grid = false;
    double pre_offset = 1.0;
    double tb_step = 0.1;
};

/// n events with independent per-event seeds derived from cfg.seed.
/// Event ids are "ev-00000", "ev-00001", ... and unique.
std::vector<ConflictEvent> gen_corpus(const CorpusConfig& cfg);

}  // namespace brakeonset
