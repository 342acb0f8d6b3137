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

#include "chiron/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "chiron/error.hpp"

namespace chiron {

namespace {

constexpr double kLatencyPercentile = 0.999;

// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double symmetric_uniform(std::mt19937_64& rng) { return 2.0 * unit_uniform(rng) - 1.0; }

std::int64_t to_steps(double ms) { return std::llround(ms); }

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw Error(ErrorCode::InvalidInput, message);
    }
}

// First checkpoint boundary (ms) at or after cycle index k.
std::int64_t checkpoint_time(std::int64_t k, double ci_ms) {
    return static_cast<std::int64_t>(std::ceil(static_cast<double>(k) * ci_ms));
}

enum class State { Normal, Halted, Warmup, CatchUp };

double filtered_mean(std::vector<double> samples) {
    if (samples.empty()) {
        return 0.0;
    }
    const auto rank = static_cast<std::size_t>(std::ceil(kLatencyPercentile * static_cast<double>(samples.size())));
    std::vector<double> sorted = samples;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
    const double cutoff = sorted[rank - 1];
    double sum = 0.0;
    std::size_t kept = 0;
    for (double s : samples) {
        if (s <= cutoff) {
            sum += s;
            ++kept;
        }
    }
    return sum / static_cast<double>(kept);
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
    std::vector<std::future<void>> tasks;
    tasks.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        tasks.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                fn(i);
            }
        }));
    }
    for (auto& t : tasks) {
        t.get();
    }
}

} // namespace

void SimConfig::validate() const {
    const std::pair<const char*, double> fields[] = {
        {"i_avg_eps", i_avg_eps},         {"ingress_jitter", ingress_jitter}, {"i_max_eps", i_max_eps},
        {"ci_ms", ci_ms},                 {"timeout_ms", timeout_ms},         {"restore_ms", restore_ms},
        {"warmup_ms", warmup_ms},         {"base_latency_ms", base_latency_ms}, {"overhead_coeff", overhead_coeff},
        {"latency_noise_ms", latency_noise_ms}, {"duration_ms", duration_ms},
    };
    for (const auto& [name, value] : fields) {
        require(std::isfinite(value) && value >= 0.0, std::string(name) + " must be finite and non-negative");
    }
    require(i_max_eps > 0.0, "i_max_eps must be positive");
    if (i_avg_eps >= i_max_eps) {
        throw Error(ErrorCode::OverUtilized, "i_avg_eps must be below i_max_eps");
    }
    require(ingress_jitter <= 1.0, "ingress_jitter must not exceed 1");
    require(ci_ms > 0.0, "ci_ms must be positive");
    require(timeout_ms > 0.0, "timeout_ms must be positive");
    require(duration_ms >= 1.0, "duration_ms must be at least 1 ms");
}

std::string_view to_string(Phase phase) {
    switch (phase) {
    case Phase::Checkpoint:
        return "checkpoint";
    case Phase::Fail:
        return "fail";
    case Phase::Detect:
        return "detect";
    case Phase::Restore:
        return "restore";
    case Phase::Maximize:
        return "maximize";
    case Phase::Equalize:
        return "equalize";
    }
    return "checkpoint";
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base ^ ((index + 1) * 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<std::int64_t> resolve_failures(const SimConfig& cfg, const FailureSpec& failures) {
    const std::int64_t duration = to_steps(cfg.duration_ms);
    std::vector<std::int64_t> times;
    if (const auto* explicit_times = std::get_if<std::vector<std::int64_t>>(&failures.injections)) {
        times = *explicit_times;
    } else {
        const auto& gen = std::get<GeneratedFailures>(failures.injections);
        if (gen.count < 0) {
            throw Error(ErrorCode::InvalidFailureSpec, "failure count must be non-negative");
        }
        std::mt19937_64 rng(derive_seed(cfg.seed, 0xFA11));
        const double slot = static_cast<double>(duration) / gen.count;
        for (int k = 0; k < gen.count; ++k) {
            const double mid = (k + 0.5) * slot;
            if (gen.spacing == Spacing::EquallySpaced) {
                times.push_back(static_cast<std::int64_t>(std::floor(mid)));
                continue;
            }
            // First full checkpoint cycle starting inside the slot.
            const auto cycle = static_cast<std::int64_t>(std::ceil(k * slot / cfg.ci_ms));
            const std::int64_t start = checkpoint_time(cycle, cfg.ci_ms);
            const std::int64_t length = checkpoint_time(cycle + 1, cfg.ci_ms) - start;
            times.push_back(start + static_cast<std::int64_t>(std::floor(unit_uniform(rng) * length)));
        }
    }
    std::sort(times.begin(), times.end());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0 || times[i] >= duration) {
            throw Error(ErrorCode::InvalidFailureSpec,
                        "failure at " + std::to_string(times[i]) + " ms lies outside [0, duration_ms)", i);
        }
        if (i > 0 && times[i] == times[i - 1]) {
            throw Error(ErrorCode::InvalidFailureSpec, "two failures injected at " + std::to_string(times[i]) + " ms",
                        i);
        }
    }
    return times;
}

SimOutcome run(const SimConfig& cfg, const FailureSpec& failures) {
    cfg.validate();
    const std::vector<std::int64_t> failure_times = resolve_failures(cfg, failures);

    const std::int64_t duration = to_steps(cfg.duration_ms);
    const std::int64_t timeout_steps = to_steps(cfg.timeout_ms);
    const std::int64_t restore_steps = to_steps(cfg.restore_ms);
    const std::int64_t warmup_steps = to_steps(cfg.warmup_ms);
    const std::int64_t capacity = std::llround(cfg.i_max_eps);
    const double steady_latency = cfg.base_latency_ms + cfg.overhead_coeff / cfg.ci_ms;

    std::mt19937_64 ingress_rng(derive_seed(cfg.seed, 1));
    std::mt19937_64 latency_rng(derive_seed(cfg.seed, 2));

    SimOutcome out;
    out.failure_times_ms = failure_times;
    std::vector<double> latency_samples;
    latency_samples.reserve(static_cast<std::size_t>(duration));

    State state = State::Normal;
    std::int64_t produced = 0;
    std::int64_t offset = 0;  // committed source position; rolls back on failure
    std::int64_t backlog = 0;
    std::int64_t checkpoint_offset = 0;
    std::int64_t last_checkpoint_ms = 0;
    std::int64_t next_cycle = 1;
    std::int64_t fail_at = 0;
    std::int64_t detect_at = 0;
    std::int64_t restore_at = 0;
    std::int64_t maximize_at = 0;
    std::size_t next_failure = 0;

    std::int64_t saturated_steps = 0;
    std::int64_t saturated_service = 0;
    double restore_total = 0.0;

    const auto log = [&](std::int64_t t, Phase p) { out.event_log.push_back({t, p}); };

    for (std::int64_t t = 0; t < duration; ++t) {
        if (state == State::Halted && t == detect_at) {
            log(t, Phase::Detect);
        }
        if (state == State::Halted && t == restore_at) {
            log(t, Phase::Restore);
            state = State::Warmup;
        }
        if (state == State::Warmup && t == maximize_at) {
            log(t, Phase::Maximize);
            state = State::CatchUp;
        }

        while (checkpoint_time(next_cycle, cfg.ci_ms) <= t) {
            if (checkpoint_time(next_cycle, cfg.ci_ms) == t && state != State::Halted) {
                log(t, Phase::Checkpoint);
                checkpoint_offset = offset;
                last_checkpoint_ms = t;
            }
            ++next_cycle;
        }

        if (next_failure < failure_times.size() && failure_times[next_failure] == t) {
            if (state != State::Normal) {
                throw Error(ErrorCode::InvalidFailureSpec,
                            "failure at " + std::to_string(t) + " ms overlaps the recovery of the failure at " +
                                std::to_string(fail_at) + " ms",
                            next_failure);
            }
            ++next_failure;
            log(t, Phase::Fail);
            out.reprocess_ms.push_back(static_cast<double>(t - last_checkpoint_ms));
            // Uncommitted work since the last checkpoint goes back onto the backlog.
            backlog += offset - checkpoint_offset;
            offset = checkpoint_offset;
            fail_at = t;
            detect_at = t + timeout_steps;
            restore_at = detect_at + restore_steps;
            maximize_at = restore_at + warmup_steps;
            restore_total += static_cast<double>(restore_steps);
            state = State::Halted;
            if (t == detect_at) {
                log(t, Phase::Detect);
            }
            if (t == restore_at) {
                log(t, Phase::Restore);
                state = State::Warmup;
            }
            if (state == State::Warmup && t == maximize_at) {
                log(t, Phase::Maximize);
                state = State::CatchUp;
            }
        }

        const double jitter = cfg.ingress_jitter * symmetric_uniform(ingress_rng);
        const std::int64_t ingress = std::llround(cfg.i_avg_eps * (1.0 + jitter));
        produced += ingress;
        backlog += ingress;

        std::int64_t limit = 0;
        switch (state) {
        case State::Normal:
        case State::CatchUp:
            limit = capacity;
            break;
        case State::Halted:
            limit = 0;
            break;
        case State::Warmup:
            limit = std::llround(cfg.i_max_eps * (static_cast<double>(t - restore_at) + 0.5) /
                                 static_cast<double>(warmup_steps));
            break;
        }
        const std::int64_t served = std::min(limit, backlog);
        offset += served;
        backlog -= served;

        const State before = state;
        if (state == State::CatchUp && served == capacity) {
            ++saturated_steps;
            saturated_service += served;
        }
        if ((state == State::Warmup || state == State::CatchUp) && backlog == 0) {
            if (state == State::Warmup) {
                log(t + 1, Phase::Maximize);
            }
            log(t + 1, Phase::Equalize);
            out.measured_trt_ms.push_back(static_cast<double>(t + 1 - fail_at));
            state = State::Normal;
        }

        const double noise = cfg.latency_noise_ms * symmetric_uniform(latency_rng);
        if (before == State::Normal) {
            latency_samples.push_back(steady_latency + noise);
        }
    }

    if (state != State::Normal) {
        throw Error(ErrorCode::NotCaughtUp, "run ended " + std::to_string(duration - fail_at) +
                                                " ms after the failure at " + std::to_string(fail_at) +
                                                " ms with the backlog still pending");
    }

    out.measured_l_avg_ms = filtered_mean(std::move(latency_samples));
    out.measured_i_avg_eps = static_cast<double>(produced) / static_cast<double>(duration);
    out.measured_i_max_eps = saturated_steps > 0
                                 ? static_cast<double>(saturated_service) / static_cast<double>(saturated_steps)
                                 : cfg.i_max_eps;
    out.measured_r_avg_ms =
        failure_times.empty() ? cfg.restore_ms : restore_total / static_cast<double>(failure_times.size());
    out.measured_w_avg_ms = cfg.warmup_ms;
    out.produced_milli_events = produced;
    out.processed_milli_events = offset;
    out.backlog_milli_events = backlog;
    return out;
}

ProfileResult profile_grid(const SimConfig& base, std::span<const double> grid, int failures_per_run, int repeats) {
    if (grid.empty()) {
        throw Error(ErrorCode::InvalidInput, "profiling grid is empty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw Error(ErrorCode::InvalidInput, "profiling grid must be strictly increasing", i);
        }
    }
    if (repeats < 1) {
        throw Error(ErrorCode::InvalidInput, "repeats must be at least 1");
    }
    if (failures_per_run < 0) {
        throw Error(ErrorCode::InvalidInput, "failures_per_run must be non-negative");
    }
    base.validate();

    const auto reps = static_cast<std::size_t>(repeats);
    const std::size_t total = grid.size() * reps;
    std::vector<SimOutcome> flat(total);
    std::vector<std::exception_ptr> errors(total);
    parallel_for(total, [&](std::size_t index) {
        SimConfig cfg = base;
        cfg.ci_ms = grid[index / reps];
        cfg.seed = derive_seed(base.seed, index);
        try {
            flat[index] = run(cfg, FailureSpec::generated(failures_per_run, Spacing::UniformRandom));
        } catch (...) {
            errors[index] = std::current_exception();
        }
    });
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    std::vector<ProfilingRunMetrics> rows;
    std::vector<std::vector<SimOutcome>> outcomes(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<ProfilingRunMetrics> per_repeat;
        for (std::size_t r = 0; r < reps; ++r) {
            const SimOutcome& o = flat[g * reps + r];
            per_repeat.push_back({grid[g], o.measured_i_avg_eps, o.measured_i_max_eps, o.measured_l_avg_ms,
                                  o.measured_r_avg_ms, o.measured_w_avg_ms, base.timeout_ms});
            outcomes[g].push_back(o);
        }
        rows.push_back(median_run(per_repeat));
    }
    return ProfileResult{ProfilingDataset(std::move(rows)), std::move(outcomes)};
}

std::vector<double> observed_trt_medians(const ProfileResult& result) {
    std::vector<double> medians;
    for (const auto& per_ci : result.outcomes) {
        std::vector<double> trts;
        for (const auto& o : per_ci) {
            trts.insert(trts.end(), o.measured_trt_ms.begin(), o.measured_trt_ms.end());
        }
        medians.push_back(trts.empty() ? std::numeric_limits<double>::quiet_NaN() : median(std::move(trts)));
    }
    return medians;
}

ValidationReport validate(const ModelFamily& family, const Recommendation& rec, const SimConfig& base, int trials) {
    if (trials < 0) {
        throw Error(ErrorCode::InvalidInput, "trials must be non-negative");
    }
    ValidationReport report;
    report.ci_ms = rec.ci_ms;
    report.c_trt_ms = rec.c_trt_ms;
    report.predicted_l_avg_ms = rec.predicted_l_avg_ms;
    report.predicted_trt_ms = predict(availability_model(family, rec.case_used), rec.ci_ms).value;

    const auto count = static_cast<std::size_t>(trials);
    std::vector<SimOutcome> outcomes(count);
    std::vector<std::exception_ptr> errors(count);
    parallel_for(count, [&](std::size_t i) {
        SimConfig cfg = base;
        cfg.ci_ms = rec.ci_ms;
        cfg.seed = derive_seed(base.seed, 0x7000 + i);
        try {
            outcomes[i] = run(cfg, FailureSpec::generated(1, Spacing::UniformRandom));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    for (std::size_t i = 0; i < count; ++i) {
        const SimOutcome& o = outcomes[i];
        ValidationTrial trial;
        trial.trial = static_cast<int>(i) + 1;
        trial.actual_trt_ms = o.measured_trt_ms.front();
        trial.constraint_satisfied = rec.c_trt_ms > trial.actual_trt_ms;
        trial.actual_l_avg_ms = o.measured_l_avg_ms;
        trial.percent_error =
            std::abs(trial.actual_l_avg_ms - rec.predicted_l_avg_ms) / std::abs(rec.predicted_l_avg_ms) * 100.0;
        report.trials.push_back(trial);
    }
    return report;
}

std::string validation_to_csv(const ValidationReport& report) {
    std::ostringstream out;
    out << "trial,actual_trt_s,constraint_satisfied,actual_l_avg_ms,percent_error\n";
    for (const auto& t : report.trials) {
        out << t.trial << ',' << format_number(t.actual_trt_ms / 1000.0) << ','
            << (t.constraint_satisfied ? "true" : "false") << ',' << format_number(t.actual_l_avg_ms) << ','
            << format_number(t.percent_error) << '\n';
    }
    return out.str();
}

std::string event_log_to_csv(std::span<const PhaseEvent> log) {
    std::ostringstream out;
    out << "t_ms,phase\n";
    for (const auto& e : log) {
        out << e.t_ms << ',' << to_string(e.phase) << '\n';
    }
    return out.str();
}

} // namespace chiron
