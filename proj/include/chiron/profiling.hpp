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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chiron/trt_heuristic.hpp"

namespace chiron {

/// Aggregated measurements of one profiled deployment at a fixed checkpoint interval.
struct ProfilingRunMetrics {
    double ci_ms = 0.0;
    double i_avg_eps = 0.0;
    double i_max_eps = 0.0;
    double l_avg_ms = 0.0;
    double r_avg_ms = 0.0;
    double w_avg_ms = 0.0;
    double timeout_ms = 0.0;

    /// Throws InvalidInput (or OverUtilized when i_avg >= i_max).
    void validate() const;

    friend bool operator==(const ProfilingRunMetrics&, const ProfilingRunMetrics&) = default;
};

/// Immutable, validated set of profiling runs ordered by strictly increasing ci_ms.
class ProfilingDataset {
public:
    static constexpr std::size_t kMinRuns = 3;

    explicit ProfilingDataset(std::vector<ProfilingRunMetrics> runs);

    [[nodiscard]] std::span<const ProfilingRunMetrics> runs() const noexcept { return runs_; }
    [[nodiscard]] std::size_t size() const noexcept { return runs_.size(); }

    friend bool operator==(const ProfilingDataset&, const ProfilingDataset&) = default;

private:
    std::vector<ProfilingRunMetrics> runs_;
};

struct GridSpec {
    double ci_min_ms = 0.0;
    double ci_max_ms = 0.0;
    int count = 0;
};

struct TrtDataPoint {
    double ci_ms = 0.0;
    TrtEstimate estimate;
};

enum class DataFormat { Csv, Json };

DataFormat parse_format(std::string_view name);

/// `count` equidistant checkpoint intervals from ci_min to ci_max, both endpoints exact.
std::vector<double> make_grid(const GridSpec& spec);

/// Runs the heuristic on every run. OverUtilized errors carry the run's zero-based index.
std::vector<TrtDataPoint> derive_trt_points(std::span<const ProfilingRunMetrics> runs);
std::vector<TrtDataPoint> derive_trt_points(const ProfilingDataset& dataset);

/// Element-wise median across repeated profiling runs at the same interval.
ProfilingRunMetrics median_run(std::span<const ProfilingRunMetrics> repeats);

double median(std::vector<double> values);

/// Parses CSV or JSON. Rows come back sorted by ci_ms; errors name the 1-based data row.
ProfilingDataset read_dataset(std::string_view source, DataFormat format);
std::string write_dataset(const ProfilingDataset& dataset, DataFormat format);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

} // namespace chiron
