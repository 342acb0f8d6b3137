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

namespace chiron {

/// Fraction of maximum processing capacity consumed under normal load, in [0, 1).
/// A value of 1 or more means the backlog never drains, so it cannot be constructed.
class Utilization {
public:
    explicit Utilization(double value);

    [[nodiscard]] double value() const noexcept { return value_; }

    friend bool operator==(const Utilization&, const Utilization&) = default;

private:
    double value_;
};

/// Durations (ms) making up the unavailable span after a failure: events to
/// reprocess, heartbeat timeout, state recovery and warm-up ramp.
class RecoveryPhases {
public:
    RecoveryPhases(double reprocess_ms, double timeout_ms, double recovery_ms, double warmup_ms);

    [[nodiscard]] double reprocess_ms() const noexcept { return reprocess_ms_; }
    [[nodiscard]] double timeout_ms() const noexcept { return timeout_ms_; }
    [[nodiscard]] double recovery_ms() const noexcept { return recovery_ms_; }
    [[nodiscard]] double warmup_ms() const noexcept { return warmup_ms_; }

    /// Sum of all four phases; the first term of the catch-up series.
    [[nodiscard]] double base_ms() const noexcept {
        return reprocess_ms_ + timeout_ms_ + recovery_ms_ + warmup_ms_;
    }

private:
    double reprocess_ms_;
    double timeout_ms_;
    double recovery_ms_;
    double warmup_ms_;
};

struct TermCounts {
    std::int64_t n_min = 0;
    std::int64_t n_avg = 0;
    std::int64_t n_max = 0;

    friend bool operator==(const TermCounts&, const TermCounts&) = default;
};

/// Best (failure right after a checkpoint), average (mid-interval) and worst
/// (just before the next checkpoint) total recovery time.
struct TrtEstimate {
    double trt_min_ms = 0.0;
    double trt_avg_ms = 0.0;
    double trt_max_ms = 0.0;
    TermCounts terms_used;

    friend bool operator==(const TrtEstimate&, const TrtEstimate&) = default;
};

/// i_avg / i_max. Throws InvalidInput for i_max <= 0 or i_avg < 0, OverUtilized for i_avg >= i_max.
Utilization utilization(double i_avg_eps, double i_max_eps);

/// Smallest n >= 1 whose series term base_ms * u^(n-1) drops below 1 ms.
std::int64_t term_count(double base_ms, Utilization u);

/// Closed-form sum of the first n terms of the catch-up series starting at base_ms.
double catchup_sum(double base_ms, Utilization u, std::int64_t n);

TrtEstimate estimate_trt(double ci_ms, double timeout_ms, double recovery_ms, double warmup_ms, Utilization u);

} // namespace chiron
