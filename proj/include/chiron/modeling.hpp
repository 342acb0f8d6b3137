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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chiron/profiling.hpp"

namespace chiron {

struct Domain {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }

    friend bool operator==(const Domain&, const Domain&) = default;
};

/// Polynomial in the raw checkpoint interval: value = sum_k coefficients[k] * x^k.
struct PolyModel {
    std::vector<double> coefficients;
    Domain domain;
    double r_squared = 0.0;

    [[nodiscard]] int degree() const noexcept { return static_cast<int>(coefficients.size()) - 1; }

    friend bool operator==(const PolyModel&, const PolyModel&) = default;
};

struct Prediction {
    double value = 0.0;
    bool extrapolated = false;
};

/// Performance model plus the best/average/worst-case availability models.
struct ModelFamily {
    PolyModel perf;
    PolyModel avail_min;
    PolyModel avail_avg;
    PolyModel avail_max;

    friend bool operator==(const ModelFamily&, const ModelFamily&) = default;
};

inline constexpr int kPipelineDegree = 2;

/// Least-squares polynomial fit. The solve runs on standardized x and the
/// coefficients are mapped back to the raw basis before returning.
PolyModel fit_poly(std::span<const double> xs, std::span<const double> ys, int degree = kPipelineDegree);

/// Horner evaluation; flags x outside the fitted domain.
Prediction predict(const PolyModel& model, double x);

/// Fits P on (ci, l_avg) and A_min/avg/max on the heuristic TRT triple.
/// Errors are re-thrown with the failing model's name (p, a_min, a_avg, a_max) prefixed.
ModelFamily fit_family(const ProfilingDataset& dataset, std::span<const TrtDataPoint> points);

std::string models_to_json(const ModelFamily& family);
ModelFamily models_from_json(std::string_view text);

} // namespace chiron
