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

#include "chiron/trt_heuristic.hpp"

#include <cmath>
#include <string>

#include "chiron/error.hpp"

namespace chiron {

namespace {

void require_duration(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw Error(ErrorCode::InvalidInput, std::string(name) + " must be a finite non-negative duration");
    }
}

} // namespace

Utilization::Utilization(double value) : value_(value) {
    if (!std::isfinite(value) || value < 0.0) {
        throw Error(ErrorCode::InvalidInput, "utilization must be finite and non-negative");
    }
    if (value >= 1.0) {
        throw Error(ErrorCode::OverUtilized, "utilization " + std::to_string(value) + " >= 1: catch-up never completes");
    }
}

RecoveryPhases::RecoveryPhases(double reprocess_ms, double timeout_ms, double recovery_ms, double warmup_ms)
    : reprocess_ms_(reprocess_ms), timeout_ms_(timeout_ms), recovery_ms_(recovery_ms), warmup_ms_(warmup_ms) {
    require_duration(reprocess_ms, "reprocess_ms");
    require_duration(timeout_ms, "timeout_ms");
    require_duration(recovery_ms, "recovery_ms");
    require_duration(warmup_ms, "warmup_ms");
    if (timeout_ms == 0.0) {
        throw Error(ErrorCode::InvalidInput, "timeout_ms must be positive");
    }
}

Utilization utilization(double i_avg_eps, double i_max_eps) {
    if (!std::isfinite(i_max_eps) || i_max_eps <= 0.0) {
        throw Error(ErrorCode::InvalidInput, "i_max_eps must be positive");
    }
    if (!std::isfinite(i_avg_eps) || i_avg_eps < 0.0) {
        throw Error(ErrorCode::InvalidInput, "i_avg_eps must be non-negative");
    }
    if (i_avg_eps >= i_max_eps) {
        throw Error(ErrorCode::OverUtilized, "average ingress " + std::to_string(i_avg_eps) +
                                                 " eps reaches maximum capacity " + std::to_string(i_max_eps) + " eps");
    }
    return Utilization(i_avg_eps / i_max_eps);
}

std::int64_t term_count(double base_ms, Utilization u) {
    require_duration(base_ms, "base_ms");
    std::int64_t n = 1;
    // a_n = base * u^(n-1); stop at the first term strictly below one millisecond.
    while (base_ms * std::pow(u.value(), static_cast<double>(n - 1)) >= 1.0) {
        ++n;
    }
    return n;
}

double catchup_sum(double base_ms, Utilization u, std::int64_t n) {
    require_duration(base_ms, "base_ms");
    if (n < 1) {
        throw Error(ErrorCode::InvalidInput, "term count must be at least 1");
    }
    const double ratio = u.value();
    if (ratio == 0.0) {
        return base_ms;
    }
    return base_ms * (1.0 - std::pow(ratio, static_cast<double>(n))) / (1.0 - ratio);
}

TrtEstimate estimate_trt(double ci_ms, double timeout_ms, double recovery_ms, double warmup_ms, Utilization u) {
    if (!std::isfinite(ci_ms) || ci_ms <= 0.0) {
        throw Error(ErrorCode::InvalidInput, "ci_ms must be positive");
    }

    struct Case {
        double trt;
        std::int64_t n;
    };
    const auto evaluate = [&](double reprocess_ms) {
        const RecoveryPhases phases(reprocess_ms, timeout_ms, recovery_ms, warmup_ms);
        const double base = phases.base_ms();
        const std::int64_t n = term_count(base, u);
        return Case{phases.timeout_ms() + phases.recovery_ms() + catchup_sum(base, u, n), n};
    };

    const Case best = evaluate(0.0);
    const Case average = evaluate(ci_ms / 2.0);
    const Case worst = evaluate(ci_ms);

    TrtEstimate estimate;
    estimate.trt_min_ms = best.trt;
    estimate.trt_avg_ms = average.trt;
    estimate.trt_max_ms = worst.trt;
    estimate.terms_used = TermCounts{best.n, average.n, worst.n};
    return estimate;
}

} // namespace chiron
