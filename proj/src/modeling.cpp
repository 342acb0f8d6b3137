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

#include "chiron/modeling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "chiron/error.hpp"

namespace chiron {

namespace {

// Row-major dense matrix, just enough for a tall-skinny QR.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

// Householder QR least squares: minimizes ||A b - y||. A must have full column rank.
std::vector<double> solve_least_squares(Matrix a, std::vector<double> y) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    for (std::size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < m; ++i) {
            norm = std::hypot(norm, a(i, j));
        }
        if (norm == 0.0) {
            throw Error(ErrorCode::InvalidInput, "design matrix is rank deficient");
        }
        const double alpha = a(j, j) > 0.0 ? -norm : norm;
        std::vector<double> v(m - j);
        for (std::size_t i = j; i < m; ++i) {
            v[i - j] = a(i, j);
        }
        v[0] -= alpha;
        const double vnorm2 = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
        if (vnorm2 == 0.0) {
            continue;
        }
        for (std::size_t c = j; c < n; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < m; ++i) {
                dot += v[i - j] * a(i, c);
            }
            const double scale = 2.0 * dot / vnorm2;
            for (std::size_t i = j; i < m; ++i) {
                a(i, c) -= scale * v[i - j];
            }
        }
        double dot = 0.0;
        for (std::size_t i = j; i < m; ++i) {
            dot += v[i - j] * y[i];
        }
        const double scale = 2.0 * dot / vnorm2;
        for (std::size_t i = j; i < m; ++i) {
            y[i] -= scale * v[i - j];
        }
    }

    std::vector<double> b(n, 0.0);
    for (std::size_t jj = n; jj-- > 0;) {
        double acc = y[jj];
        for (std::size_t c = jj + 1; c < n; ++c) {
            acc -= a(jj, c) * b[c];
        }
        if (a(jj, jj) == 0.0) {
            throw Error(ErrorCode::InvalidInput, "design matrix is rank deficient");
        }
        b[jj] = acc / a(jj, jj);
    }
    return b;
}

double binomial(int n, int k) {
    double result = 1.0;
    for (int i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
    }
    return result;
}

nlohmann::ordered_json model_to_json(const PolyModel& model) {
    nlohmann::ordered_json j;
    j["coefficients"] = model.coefficients;
    j["domain"] = {model.domain.lo, model.domain.hi};
    j["r_squared"] = model.r_squared;
    return j;
}

PolyModel model_from_json(const nlohmann::json& j, const std::string& name) {
    const auto fail = [&](const std::string& what) {
        throw Error(ErrorCode::SchemaError, "model '" + name + "': " + what);
    };
    if (!j.is_object()) {
        fail("must be an object");
    }
    PolyModel model;
    const auto coeffs = j.find("coefficients");
    if (coeffs == j.end() || !coeffs->is_array() || coeffs->empty()) {
        fail("missing coefficients array");
    }
    for (const auto& c : *coeffs) {
        if (!c.is_number()) {
            fail("coefficients must be numbers");
        }
        model.coefficients.push_back(c.get<double>());
    }
    const auto domain = j.find("domain");
    if (domain == j.end() || !domain->is_array() || domain->size() != 2 || !(*domain)[0].is_number() ||
        !(*domain)[1].is_number()) {
        fail("domain must be [lo, hi]");
    }
    model.domain = {(*domain)[0].get<double>(), (*domain)[1].get<double>()};
    if (!(model.domain.lo < model.domain.hi)) {
        fail("domain lo must be below hi");
    }
    const auto r2 = j.find("r_squared");
    if (r2 == j.end() || !r2->is_number()) {
        fail("missing r_squared");
    }
    model.r_squared = r2->get<double>();
    for (double c : model.coefficients) {
        if (!std::isfinite(c)) {
            fail("coefficients must be finite");
        }
    }
    return model;
}

} // namespace

PolyModel fit_poly(std::span<const double> xs, std::span<const double> ys, int degree) {
    if (xs.size() != ys.size()) {
        throw Error(ErrorCode::InvalidInput, "xs and ys differ in length");
    }
    if (degree < 0) {
        throw Error(ErrorCode::InvalidInput, "degree must be non-negative");
    }
    const std::size_t terms = static_cast<std::size_t>(degree) + 1;
    if (xs.size() < std::max<std::size_t>(terms, 2)) {
        throw Error(ErrorCode::InsufficientPoints, "need at least " + std::to_string(std::max<std::size_t>(terms, 2)) +
                                                       " points for degree " + std::to_string(degree) + ", got " +
                                                       std::to_string(xs.size()));
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            throw Error(ErrorCode::InvalidInput, "non-finite sample", i);
        }
    }
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error(ErrorCode::DuplicateX, "x values must be pairwise distinct");
    }

    PolyModel model;
    model.domain = {sorted.front(), sorted.back()};

    if (std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys[0]; })) {
        model.coefficients.assign(terms, 0.0);
        model.coefficients[0] = ys[0];
        model.r_squared = 1.0;
        return model;
    }

    const double n = static_cast<double>(xs.size());
    const double center = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double spread = 0.0;
    for (double x : xs) {
        spread += (x - center) * (x - center);
    }
    spread = std::sqrt(spread / n);

    Matrix design(xs.size(), terms);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double t = (xs[i] - center) / spread;
        double power = 1.0;
        for (std::size_t k = 0; k < terms; ++k) {
            design(i, k) = power;
            power *= t;
        }
    }
    const Matrix scaled_design = design;
    const std::vector<double> scaled = solve_least_squares(std::move(design), std::vector<double>(ys.begin(), ys.end()));

    const double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double fitted = 0.0;
        for (std::size_t k = 0; k < terms; ++k) {
            fitted += scaled[k] * scaled_design(i, k);
        }
        ss_res += (ys[i] - fitted) * (ys[i] - fitted);
        ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    if (ss_tot == 0.0) {
        if (ss_res > 0.0) {
            throw Error(ErrorCode::ZeroVariance, "y has zero variance but the fit leaves a residual");
        }
        model.r_squared = 1.0;
    } else {
        model.r_squared = 1.0 - ss_res / ss_tot;
    }

    // sum_k b_k ((x - center)/spread)^k expanded into powers of raw x.
    model.coefficients.assign(terms, 0.0);
    for (std::size_t k = 0; k < terms; ++k) {
        const double bk = scaled[k] / std::pow(spread, static_cast<double>(k));
        for (std::size_t j = 0; j <= k; ++j) {
            model.coefficients[j] += bk * binomial(static_cast<int>(k), static_cast<int>(j)) *
                                     std::pow(-center, static_cast<double>(k - j));
        }
    }
    return model;
}

Prediction predict(const PolyModel& model, double x) {
    double value = 0.0;
    for (auto it = model.coefficients.rbegin(); it != model.coefficients.rend(); ++it) {
        value = value * x + *it;
    }
    return {value, !model.domain.contains(x)};
}

ModelFamily fit_family(const ProfilingDataset& dataset, std::span<const TrtDataPoint> points) {
    const auto runs = dataset.runs();
    if (runs.size() != points.size()) {
        throw Error(ErrorCode::InvalidInput, "dataset has " + std::to_string(runs.size()) + " runs but " +
                                                 std::to_string(points.size()) + " TRT points were given");
    }
    std::vector<double> ci;
    std::vector<double> latency;
    std::vector<double> trt_min;
    std::vector<double> trt_avg;
    std::vector<double> trt_max;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].ci_ms != points[i].ci_ms) {
            throw Error(ErrorCode::InvalidInput, "TRT point ci does not match dataset run", i);
        }
        ci.push_back(runs[i].ci_ms);
        latency.push_back(runs[i].l_avg_ms);
        trt_min.push_back(points[i].estimate.trt_min_ms);
        trt_avg.push_back(points[i].estimate.trt_avg_ms);
        trt_max.push_back(points[i].estimate.trt_max_ms);
    }

    const auto fit_named = [&](const char* name, const std::vector<double>& ys) {
        try {
            return fit_poly(ci, ys, kPipelineDegree);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(name) + ": " + e.what(), e.index());
        }
    };

    ModelFamily family;
    family.perf = fit_named("p", latency);
    family.avail_min = fit_named("a_min", trt_min);
    family.avail_avg = fit_named("a_avg", trt_avg);
    family.avail_max = fit_named("a_max", trt_max);
    return family;
}

std::string models_to_json(const ModelFamily& family) {
    nlohmann::ordered_json doc;
    doc["p"] = model_to_json(family.perf);
    doc["a_min"] = model_to_json(family.avail_min);
    doc["a_avg"] = model_to_json(family.avail_avg);
    doc["a_max"] = model_to_json(family.avail_max);
    return doc.dump(2) + "\n";
}

ModelFamily models_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed models JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error(ErrorCode::SchemaError, "models JSON must be an object");
    }
    const auto get = [&](const char* key) {
        if (!doc.contains(key)) {
            throw Error(ErrorCode::SchemaError, std::string("models JSON is missing '") + key + "'");
        }
        return model_from_json(doc[key], key);
    };
    ModelFamily family{get("p"), get("a_min"), get("a_avg"), get("a_max")};
    const Domain shared = family.perf.domain;
    for (const PolyModel* m : {&family.avail_min, &family.avail_avg, &family.avail_max}) {
        if (!(m->domain == shared)) {
            throw Error(ErrorCode::SchemaError, "all four models must share the same domain");
        }
    }
    return family;
}

} // namespace chiron
