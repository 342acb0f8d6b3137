/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chiron/optimizer.hpp"
#include "chiron/profiling.hpp"

namespace chiron {

/// Parameters of one simulated checkpointed streaming job.
///
/// Event flow is a fluid approximation at 1 ms resolution. Quantities are kept as
/// integer milli-events, so a rate of X events/s moves exactly X units per step.
struct SimConfig {
    double i_avg_eps = 0.0;
    double ingress_jitter = 0.0;  // half-width of uniform multiplicative noise on ingress
    double i_max_eps = 0.0;
    double ci_ms = 0.0;
    double timeout_ms = 0.0;
    double restore_ms = 0.0;
    double warmup_ms = 0.0;  // ingress capacity ramps linearly 0 -> i_max over this span
    double base_latency_ms = 0.0;
    double overhead_coeff = 0.0;  // ms^2; steady latency is base + overhead_coeff / ci
    double latency_noise_ms = 0.0;
    double duration_ms = 0.0;
    std::uint64_t seed = 0;

    void validate() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

enum class Spacing { UniformRandom, EquallySpaced };

/// `count` failures, one per equal slot of the run. UniformRandom picks a uniform
/// offset inside the first checkpoint cycle that starts within the slot;
/// EquallySpaced fails exactly at each slot midpoint.
struct GeneratedFailures {
    int count = 0;
    Spacing spacing = Spacing::UniformRandom;

    friend bool operator==(const GeneratedFailures&, const GeneratedFailures&) = default;
};

struct FailureSpec {
    std::variant<std::vector<std::int64_t>, GeneratedFailures> injections;

    static FailureSpec none() { return FailureSpec{std::vector<std::int64_t>{}}; }
    static FailureSpec at(std::vector<std::int64_t> times_ms) { return FailureSpec{std::move(times_ms)}; }
    static FailureSpec generated(int count, Spacing spacing) { return FailureSpec{GeneratedFailures{count, spacing}}; }
};

enum class Phase { Checkpoint, Fail, Detect, Restore, Maximize, Equalize };

std::string_view to_string(Phase phase);

struct PhaseEvent {
    std::int64_t t_ms = 0;
    Phase phase = Phase::Checkpoint;

    friend bool operator==(const PhaseEvent&, const PhaseEvent&) = default;
};

struct SimOutcome {
    double measured_l_avg_ms = 0.0;
    std::vector<double> measured_trt_ms;
    double measured_r_avg_ms = 0.0;
    double measured_w_avg_ms = 0.0;
    double measured_i_avg_eps = 0.0;
    double measured_i_max_eps = 0.0;
    std::vector<PhaseEvent> event_log;

    std::vector<std::int64_t> failure_times_ms;
    std::vector<double> reprocess_ms;  // time since the last completed checkpoint, per failure

    // Conservation ledger, in milli-events: produced == processed + backlog.
    std::int64_t produced_milli_events = 0;
    std::int64_t processed_milli_events = 0;
    std::int64_t backlog_milli_events = 0;

    friend bool operator==(const SimOutcome&, const SimOutcome&) = default;
};

/// Resolves a FailureSpec into concrete failure instants for `cfg`.
std::vector<std::int64_t> resolve_failures(const SimConfig& cfg, const FailureSpec& failures);

/// Deterministic given cfg.seed. Throws InvalidFailureSpec when a failure lands
/// inside an ongoing recovery and NotCaughtUp when the run ends mid-recovery.
SimOutcome run(const SimConfig& cfg, const FailureSpec& failures);

/// splitmix64 finalizer over (base ^ index * golden-ratio increment).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

struct ProfileResult {
    ProfilingDataset dataset;
    std::vector<std::vector<SimOutcome>> outcomes;  // [grid index][repeat]
};

/// One simulated profiling deployment per grid interval, `repeats` times each, with
/// element-wise medians forming the dataset row.
ProfileResult profile_grid(const SimConfig& base, std::span<const double> grid, int failures_per_run, int repeats);

/// Median measured TRT per grid interval (NaN where no failure was injected).
std::vector<double> observed_trt_medians(const ProfileResult& result);

struct ValidationTrial {
    int trial = 0;
    double actual_trt_ms = 0.0;
    bool constraint_satisfied = false;
    double actual_l_avg_ms = 0.0;
    double percent_error = 0.0;  // |actual - predicted| / predicted * 100
};

struct ValidationReport {
    double ci_ms = 0.0;
    double c_trt_ms = 0.0;
    double predicted_l_avg_ms = 0.0;
    double predicted_trt_ms = 0.0;
    std::vector<ValidationTrial> trials;
};

/// Re-runs the job at the recommended interval with one failure per trial at a
/// random point of the checkpoint cycle.
ValidationReport validate(const ModelFamily& family, const Recommendation& rec, const SimConfig& base, int trials);

std::string validation_to_csv(const ValidationReport& report);

SimConfig sim_config_from_json(std::string_view text);
std::string sim_config_to_json(const SimConfig& cfg);
FailureSpec failure_spec_from_json(std::string_view text);
std::string outcome_to_json(const SimOutcome& outcome);
std::string event_log_to_csv(std::span<const PhaseEvent> log);

} // namespace chiron
