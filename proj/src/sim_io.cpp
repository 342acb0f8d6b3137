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

#include <cmath>

#include <nlohmann/json.hpp>

#include "chiron/error.hpp"
#include "chiron/simulator.hpp"

namespace chiron {

namespace {

nlohmann::json parse_document(std::string_view text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed ") + what + " JSON: " + e.what());
    }
}

double number_field(const nlohmann::json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_number()) {
        throw Error(ErrorCode::SchemaError, std::string("field '") + key + "' is missing or not a number");
    }
    return it->get<double>();
}

} // namespace

SimConfig sim_config_from_json(std::string_view text) {
    const nlohmann::json doc = parse_document(text, "SimConfig");
    if (!doc.is_object()) {
        throw Error(ErrorCode::SchemaError, "SimConfig must be a JSON object");
    }
    SimConfig cfg;
    cfg.i_avg_eps = number_field(doc, "i_avg_eps");
    cfg.ingress_jitter = number_field(doc, "ingress_jitter");
    cfg.i_max_eps = number_field(doc, "i_max_eps");
    cfg.ci_ms = number_field(doc, "ci_ms");
    cfg.timeout_ms = number_field(doc, "timeout_ms");
    cfg.restore_ms = number_field(doc, "restore_ms");
    cfg.warmup_ms = number_field(doc, "warmup_ms");
    cfg.base_latency_ms = number_field(doc, "base_latency_ms");
    cfg.overhead_coeff = number_field(doc, "overhead_coeff");
    cfg.latency_noise_ms = number_field(doc, "latency_noise_ms");
    cfg.duration_ms = number_field(doc, "duration_ms");
    const auto seed = doc.find("seed");
    if (seed == doc.end() || !seed->is_number_unsigned()) {
        throw Error(ErrorCode::SchemaError, "field 'seed' is missing or not an unsigned integer");
    }
    cfg.seed = seed->get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

std::string sim_config_to_json(const SimConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["i_avg_eps"] = cfg.i_avg_eps;
    doc["ingress_jitter"] = cfg.ingress_jitter;
    doc["i_max_eps"] = cfg.i_max_eps;
    doc["ci_ms"] = cfg.ci_ms;
    doc["timeout_ms"] = cfg.timeout_ms;
    doc["restore_ms"] = cfg.restore_ms;
    doc["warmup_ms"] = cfg.warmup_ms;
    doc["base_latency_ms"] = cfg.base_latency_ms;
    doc["overhead_coeff"] = cfg.overhead_coeff;
    doc["latency_noise_ms"] = cfg.latency_noise_ms;
    doc["duration_ms"] = cfg.duration_ms;
    doc["seed"] = cfg.seed;
    return doc.dump(2) + "\n";
}

FailureSpec failure_spec_from_json(std::string_view text) {
    const nlohmann::json doc = parse_document(text, "FailureSpec");
    if (!doc.is_object() || !doc.contains("injections")) {
        throw Error(ErrorCode::SchemaError, "FailureSpec must be an object with an 'injections' field");
    }
    const auto& injections = doc["injections"];
    if (injections.is_array()) {
        std::vector<std::int64_t> times;
        for (const auto& entry : injections) {
            if (!entry.is_object() || !entry.contains("at_ms") || !entry["at_ms"].is_number()) {
                throw Error(ErrorCode::SchemaError, "each injection needs a numeric 'at_ms'");
            }
            const double at = entry["at_ms"].get<double>();
            if (!std::isfinite(at) || at != std::floor(at)) {
                throw Error(ErrorCode::SchemaError, "'at_ms' must be a whole millisecond");
            }
            times.push_back(static_cast<std::int64_t>(at));
        }
        return FailureSpec::at(std::move(times));
    }
    if (injections.is_object()) {
        if (!injections.contains("count") || !injections["count"].is_number_integer()) {
            throw Error(ErrorCode::SchemaError, "'count' must be an integer");
        }
        Spacing spacing = Spacing::UniformRandom;
        if (injections.contains("spacing")) {
            const auto& s = injections["spacing"];
            if (s == "uniform_random") {
                spacing = Spacing::UniformRandom;
            } else if (s == "equally_spaced") {
                spacing = Spacing::EquallySpaced;
            } else {
                throw Error(ErrorCode::SchemaError, "'spacing' must be uniform_random or equally_spaced");
            }
        }
        return FailureSpec::generated(injections["count"].get<int>(), spacing);
    }
    throw Error(ErrorCode::SchemaError, "'injections' must be an array of {at_ms} or a {count, spacing} object");
}

std::string outcome_to_json(const SimOutcome& outcome) {
    nlohmann::ordered_json doc;
    doc["measured_l_avg_ms"] = outcome.measured_l_avg_ms;
    doc["measured_trt_ms"] = outcome.measured_trt_ms;
    doc["measured_r_avg_ms"] = outcome.measured_r_avg_ms;
    doc["measured_w_avg_ms"] = outcome.measured_w_avg_ms;
    doc["measured_i_avg_eps"] = outcome.measured_i_avg_eps;
    doc["measured_i_max_eps"] = outcome.measured_i_max_eps;
    doc["failure_times_ms"] = outcome.failure_times_ms;
    doc["reprocess_ms"] = outcome.reprocess_ms;
    doc["produced_milli_events"] = outcome.produced_milli_events;
    doc["processed_milli_events"] = outcome.processed_milli_events;
    doc["backlog_milli_events"] = outcome.backlog_milli_events;
    return doc.dump(2) + "\n";
}

} // namespace chiron
