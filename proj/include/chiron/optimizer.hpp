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

#include <string>
#include <string_view>

#include "chiron/modeling.hpp"

namespace chiron {

enum class TrtCase { Min, Avg, Max };

std::string_view to_string(TrtCase c);
TrtCase parse_case(std::string_view name);

/// Upper bound on total recovery time and which availability curve it applies to.
class QosConstraint {
public:
    QosConstraint(double c_trt_ms, TrtCase case_selector);

    [[nodiscard]] double c_trt_ms() const noexcept { return c_trt_ms_; }
    [[nodiscard]] TrtCase case_selector() const noexcept { return case_; }

private:
    double c_trt_ms_;
    TrtCase case_;
};

struct Recommendation {
    double ci_ms = 0.0;
    double c_trt_ms = 0.0;
    double predicted_l_avg_ms = 0.0;
    bool clamped = false;
    TrtCase case_used = TrtCase::Max;

    friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

const PolyModel& availability_model(const ModelFamily& family, TrtCase c);

/// Solves model(x) == target inside the model domain, preferring the larger root.
/// Throws Infeasible (no real root) or OutOfDomainError (roots exist, none in domain).
double invert_availability(const PolyModel& model, double target);

/// Largest interval whose predicted TRT meets the constraint, with the performance
/// model's latency at that interval. With `clamp`, an out-of-domain root falls back
/// to the nearest domain endpoint that still satisfies the bound.
Recommendation recommend(const ModelFamily& family, const QosConstraint& q, bool clamp);

/// The JSON document also carries the family's four R² values.
std::string recommendation_to_json(const Recommendation& rec, const ModelFamily& family);
Recommendation recommendation_from_json(std::string_view text);

} // namespace chiron
