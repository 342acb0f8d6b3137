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

#include "chiron/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "chiron/error.hpp"

namespace chiron {

namespace {

// Quadratic terms this small relative to the rest, over the domain's half-width, are treated as linear.
constexpr double kLinearThreshold = 1e-12;

std::vector<double> real_roots(double c0, double c1, double c2, double target, double half_width) {
    const double c = c0 - target;
    const double quad_scale = std::abs(c2) * half_width * half_width;
    const double rest_scale = std::max({1.0, std::abs(c1) * half_width, std::abs(c)});
    if (quad_scale < kLinearThreshold * rest_scale) {
        if (c1 == 0.0) {
            return {};
        }
        return {-c / c1};
    }
    const double disc = c1 * c1 - 4.0 * c2 * c;
    if (disc < 0.0) {
        return {};
    }
    const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
    if (q == 0.0) {
        return {0.0};
    }
    return {q / c2, c / q};
}

} // namespace

std::string_view to_string(TrtCase c) {
    switch (c) {
    case TrtCase::Min:
        return "min";
    case TrtCase::Avg:
        return "avg";
    case TrtCase::Max:
        return "max";
    }
    return "max";
}

TrtCase parse_case(std::string_view name) {
    if (name == "min") {
        return TrtCase::Min;
    }
    if (name == "avg") {
        return TrtCase::Avg;
    }
    if (name == "max") {
        return TrtCase::Max;
    }
    throw Error(ErrorCode::InvalidInput, "case must be one of min, avg, max; got '" + std::string(name) + "'");
}

QosConstraint::QosConstraint(double c_trt_ms, TrtCase case_selector) : c_trt_ms_(c_trt_ms), case_(case_selector) {
    if (!std::isfinite(c_trt_ms) || c_trt_ms <= 0.0) {
        throw Error(ErrorCode::InvalidInput, "c_trt_ms must be positive");
    }
}

const PolyModel& availability_model(const ModelFamily& family, TrtCase c) {
    switch (c) {
    case TrtCase::Min:
        return family.avail_min;
    case TrtCase::Avg:
        return family.avail_avg;
    case TrtCase::Max:
        break;
    }
    return family.avail_max;
}

double invert_availability(const PolyModel& model, double target) {
    if (!std::isfinite(target) || target <= 0.0) {
        throw Error(ErrorCode::InvalidInput, "target must be positive");
    }
    if (model.degree() > 2 || model.coefficients.empty()) {
        throw Error(ErrorCode::InvalidInput, "only models of degree <= 2 can be inverted");
    }
    std::array<double, 3> c{};
    std::copy(model.coefficients.begin(), model.coefficients.end(), c.begin());

    const Domain& d = model.domain;
    const auto roots = real_roots(c[0], c[1], c[2], target, (d.hi - d.lo) / 2.0);
    if (roots.empty()) {
        throw Error(ErrorCode::Infeasible, "availability model never reaches " + std::to_string(target) + " ms");
    }

    const double tolerance = 1e-9 * (d.hi - d.lo);
    double best = -INFINITY;
    double nearest = roots.front();
    double nearest_distance = INFINITY;
    for (double r : roots) {
        const double distance = std::max({0.0, d.lo - r, r - d.hi});
        if (distance <= tolerance) {
            best = std::max(best, std::clamp(r, d.lo, d.hi));
        }
        if (distance < nearest_distance) {
            nearest_distance = distance;
            nearest = r;
        }
    }
    if (best == -INFINITY) {
        throw OutOfDomainError("no root for target " + std::to_string(target) + " ms within domain [" +
                                   std::to_string(d.lo) + ", " + std::to_string(d.hi) + "]; nearest root at " +
                                   std::to_string(nearest),
                               nearest, d.lo, d.hi);
    }
    return best;
}

Recommendation recommend(const ModelFamily& family, const QosConstraint& q, bool clamp) {
    const PolyModel& model = availability_model(family, q.case_selector());
    Recommendation rec;
    rec.c_trt_ms = q.c_trt_ms();
    rec.case_used = q.case_selector();
    try {
        rec.ci_ms = invert_availability(model, q.c_trt_ms());
    } catch (const OutOfDomainError& e) {
        if (!clamp) {
            throw;
        }
        std::array<double, 2> endpoints{e.domain_lo(), e.domain_hi()};
        std::sort(endpoints.begin(), endpoints.end(), [&](double a, double b) {
            return std::abs(a - e.nearest_root()) < std::abs(b - e.nearest_root());
        });
        const auto it = std::find_if(endpoints.begin(), endpoints.end(),
                                     [&](double x) { return predict(model, x).value <= q.c_trt_ms(); });
        if (it == endpoints.end()) {
            throw OutOfDomainError(std::string(e.what()) + "; no domain endpoint satisfies the constraint",
                                   e.nearest_root(), e.domain_lo(), e.domain_hi());
        }
        rec.ci_ms = *it;
        rec.clamped = true;
    }
    rec.predicted_l_avg_ms = predict(family.perf, rec.ci_ms).value;
    return rec;
}

std::string recommendation_to_json(const Recommendation& rec, const ModelFamily& family) {
    nlohmann::ordered_json doc;
    doc["ci_ms"] = rec.ci_ms;
    doc["c_trt_ms"] = rec.c_trt_ms;
    doc["predicted_l_avg_ms"] = rec.predicted_l_avg_ms;
    doc["clamped"] = rec.clamped;
    doc["case_used"] = std::string(to_string(rec.case_used));
    nlohmann::ordered_json r2;
    r2["p"] = family.perf.r_squared;
    r2["a_min"] = family.avail_min.r_squared;
    r2["a_avg"] = family.avail_avg.r_squared;
    r2["a_max"] = family.avail_max.r_squared;
    doc["r_squared"] = std::move(r2);
    return doc.dump(2) + "\n";
}

Recommendation recommendation_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed recommendation JSON: ") + e.what());
    }
    const auto number = [&](const char* key) {
        if (!doc.is_object() || !doc.contains(key) || !doc[key].is_number()) {
            throw Error(ErrorCode::SchemaError, std::string("recommendation is missing numeric '") + key + "'");
        }
        return doc[key].get<double>();
    };
    Recommendation rec;
    rec.ci_ms = number("ci_ms");
    rec.c_trt_ms = number("c_trt_ms");
    rec.predicted_l_avg_ms = number("predicted_l_avg_ms");
    if (!doc.contains("clamped") || !doc["clamped"].is_boolean()) {
        throw Error(ErrorCode::SchemaError, "recommendation is missing boolean 'clamped'");
    }
    rec.clamped = doc["clamped"].get<bool>();
    if (!doc.contains("case_used") || !doc["case_used"].is_string()) {
        throw Error(ErrorCode::SchemaError, "recommendation is missing 'case_used'");
    }
    rec.case_used = parse_case(doc["case_used"].get<std::string>());
    return rec;
}

} // namespace chiron
