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

#include "chiron/profiling.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "chiron/error.hpp"

namespace chiron {

namespace {

constexpr std::array<std::string_view, 7> kColumns = {
    "ci_ms", "i_avg_eps", "i_max_eps", "l_avg_ms", "r_avg_ms", "w_avg_ms", "timeout_ms",
};

std::array<double*, 7> fields_of(ProfilingRunMetrics& run) {
    return {&run.ci_ms, &run.i_avg_eps, &run.i_max_eps, &run.l_avg_ms, &run.r_avg_ms, &run.w_avg_ms, &run.timeout_ms};
}

std::array<double, 7> values_of(const ProfilingRunMetrics& run) {
    return {run.ci_ms, run.i_avg_eps, run.i_max_eps, run.l_avg_ms, run.r_avg_ms, run.w_avg_ms, run.timeout_ms};
}

std::string row_prefix(std::size_t row) { return "row " + std::to_string(row) + ": "; }

// Sorts, rejects duplicate intervals and validates each run, reporting 1-based input rows.
ProfilingDataset build_dataset(std::vector<ProfilingRunMetrics> runs) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
        try {
            runs[i].validate();
        } catch (const Error& e) {
            throw Error(e.code(), row_prefix(i + 1) + e.what(), i + 1);
        }
    }
    std::vector<std::size_t> order(runs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return runs[a].ci_ms < runs[b].ci_ms; });
    std::vector<ProfilingRunMetrics> sorted;
    sorted.reserve(runs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0 && runs[order[k]].ci_ms == runs[order[k - 1]].ci_ms) {
            const std::size_t row = std::max(order[k], order[k - 1]) + 1;
            throw Error(ErrorCode::DuplicateCi,
                        row_prefix(row) + "duplicate ci_ms " + format_number(runs[order[k]].ci_ms), row);
        }
        sorted.push_back(runs[order[k]]);
    }
    return ProfilingDataset(std::move(sorted));
}

double parse_double(std::string_view text, std::size_t row, std::string_view column) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc() || ptr != last) {
        throw Error(ErrorCode::SchemaError,
                    row_prefix(row) + "column " + std::string(column) + ": cannot parse '" + std::string(text) + "'",
                    row);
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(line.substr(start));
            return parts;
        }
        parts.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

ProfilingDataset read_csv(std::string_view source) {
    std::vector<std::string_view> lines = split(source, '\n');
    for (auto& line : lines) {
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
    }
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw Error(ErrorCode::SchemaError, "missing CSV header");
    }
    const auto header = split(lines.front(), ',');
    if (header.size() != kColumns.size() || !std::equal(header.begin(), header.end(), kColumns.begin())) {
        throw Error(ErrorCode::SchemaError, "CSV header must be exactly 'ci_ms,i_avg_eps,i_max_eps,l_avg_ms,"
                                            "r_avg_ms,w_avg_ms,timeout_ms'");
    }

    std::vector<ProfilingRunMetrics> runs;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i], ',');
        if (cells.size() != kColumns.size()) {
            throw Error(ErrorCode::SchemaError,
                        row_prefix(i) + "expected 7 fields, found " + std::to_string(cells.size()), i);
        }
        ProfilingRunMetrics run;
        const auto fields = fields_of(run);
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            *fields[c] = parse_double(cells[c], i, kColumns[c]);
        }
        runs.push_back(run);
    }
    return build_dataset(std::move(runs));
}

ProfilingDataset read_json(std::string_view source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(source);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("runs") || !doc["runs"].is_array()) {
        throw Error(ErrorCode::SchemaError, "JSON dataset must be an object with a 'runs' array");
    }
    std::vector<ProfilingRunMetrics> runs;
    std::size_t row = 0;
    for (const auto& entry : doc["runs"]) {
        ++row;
        if (!entry.is_object()) {
            throw Error(ErrorCode::SchemaError, row_prefix(row) + "run must be an object", row);
        }
        ProfilingRunMetrics run;
        const auto fields = fields_of(run);
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            const std::string key(kColumns[c]);
            const auto it = entry.find(key);
            if (it == entry.end() || !it->is_number()) {
                throw Error(ErrorCode::SchemaError, row_prefix(row) + "missing numeric field " + key, row);
            }
            *fields[c] = it->get<double>();
        }
        if (entry.size() != kColumns.size()) {
            throw Error(ErrorCode::SchemaError, row_prefix(row) + "unexpected extra fields", row);
        }
        runs.push_back(run);
    }
    return build_dataset(std::move(runs));
}

} // namespace

void ProfilingRunMetrics::validate() const {
    const auto values = values_of(*this);
    for (std::size_t c = 0; c < values.size(); ++c) {
        if (!std::isfinite(values[c]) || values[c] < 0.0) {
            throw Error(ErrorCode::InvalidInput, std::string(kColumns[c]) + " must be finite and non-negative");
        }
    }
    if (ci_ms <= 0.0) {
        throw Error(ErrorCode::InvalidInput, "ci_ms must be positive");
    }
    if (timeout_ms <= 0.0) {
        throw Error(ErrorCode::InvalidInput, "timeout_ms must be positive");
    }
    if (i_avg_eps >= i_max_eps) {
        throw Error(ErrorCode::OverUtilized, "i_avg_eps must be below i_max_eps");
    }
}

ProfilingDataset::ProfilingDataset(std::vector<ProfilingRunMetrics> runs) : runs_(std::move(runs)) {
    if (runs_.size() < kMinRuns) {
        throw Error(ErrorCode::InsufficientPoints, "a profiling dataset needs at least 3 runs, got " +
                                                       std::to_string(runs_.size()));
    }
    for (std::size_t i = 0; i < runs_.size(); ++i) {
        runs_[i].validate();
        if (i > 0 && !(runs_[i].ci_ms > runs_[i - 1].ci_ms)) {
            throw Error(ErrorCode::InvalidInput, "ci_ms values must be strictly increasing", i);
        }
    }
}

DataFormat parse_format(std::string_view name) {
    if (name == "csv") {
        return DataFormat::Csv;
    }
    if (name == "json") {
        return DataFormat::Json;
    }
    throw Error(ErrorCode::InvalidInput, "unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::vector<double> make_grid(const GridSpec& spec) {
    if (spec.count < 2) {
        throw Error(ErrorCode::InvalidInput, "grid needs at least 2 points");
    }
    if (!std::isfinite(spec.ci_min_ms) || !std::isfinite(spec.ci_max_ms) || !(spec.ci_min_ms < spec.ci_max_ms)) {
        throw Error(ErrorCode::InvalidInput, "grid requires ci_min_ms < ci_max_ms");
    }
    const double span = spec.ci_max_ms - spec.ci_min_ms;
    const int last = spec.count - 1;
    std::vector<double> grid(static_cast<std::size_t>(spec.count));
    for (int i = 0; i < last; ++i) {
        grid[static_cast<std::size_t>(i)] = spec.ci_min_ms + span * i / last;
    }
    grid.back() = spec.ci_max_ms;
    return grid;
}

std::vector<TrtDataPoint> derive_trt_points(std::span<const ProfilingRunMetrics> runs) {
    std::vector<TrtDataPoint> points;
    points.reserve(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& run = runs[i];
        try {
            const Utilization u = utilization(run.i_avg_eps, run.i_max_eps);
            points.push_back({run.ci_ms, estimate_trt(run.ci_ms, run.timeout_ms, run.r_avg_ms, run.w_avg_ms, u)});
        } catch (const Error& e) {
            throw Error(e.code(), "run " + std::to_string(i) + ": " + e.what(), i);
        }
    }
    return points;
}

std::vector<TrtDataPoint> derive_trt_points(const ProfilingDataset& dataset) {
    return derive_trt_points(dataset.runs());
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw Error(ErrorCode::InvalidInput, "median of an empty sequence");
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) {
        return values[mid];
    }
    return values[mid - 1] + (values[mid] - values[mid - 1]) / 2.0;
}

ProfilingRunMetrics median_run(std::span<const ProfilingRunMetrics> repeats) {
    if (repeats.empty()) {
        throw Error(ErrorCode::InvalidInput, "no runs to aggregate");
    }
    ProfilingRunMetrics result;
    const auto out = fields_of(result);
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        std::vector<double> column;
        column.reserve(repeats.size());
        for (const auto& run : repeats) {
            column.push_back(values_of(run)[c]);
        }
        *out[c] = median(std::move(column));
    }
    return result;
}

std::string format_number(double value) {
    std::array<char, 64> buffer{};
    const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    if (ec != std::errc()) {
        throw Error(ErrorCode::InvalidInput, "cannot format number");
    }
    return std::string(buffer.data(), ptr);
}

ProfilingDataset read_dataset(std::string_view source, DataFormat format) {
    return format == DataFormat::Csv ? read_csv(source) : read_json(source);
}

std::string write_dataset(const ProfilingDataset& dataset, DataFormat format) {
    if (format == DataFormat::Csv) {
        std::ostringstream out;
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            out << (c ? "," : "") << kColumns[c];
        }
        out << '\n';
        for (const auto& run : dataset.runs()) {
            const auto values = values_of(run);
            for (std::size_t c = 0; c < values.size(); ++c) {
                out << (c ? "," : "") << format_number(values[c]);
            }
            out << '\n';
        }
        return out.str();
    }

    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& run : dataset.runs()) {
        nlohmann::ordered_json entry;
        const auto values = values_of(run);
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            entry[std::string(kColumns[c])] = values[c];
        }
        runs.push_back(std::move(entry));
    }
    nlohmann::ordered_json doc;
    doc["runs"] = std::move(runs);
    return doc.dump(2) + "\n";
}

} // namespace chiron
