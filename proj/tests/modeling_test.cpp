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
#include <random>

#include <gtest/gtest.h>

#include "chiron/error.hpp"
#include "chiron/modeling.hpp"
#include "support/oracles.hpp"
#include "support/reference.hpp"

namespace chiron {
namespace {

double ss_res(const PolyModel& m, const std::vector<double>& xs, const std::vector<double>& ys) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - oracle::naive_eval(m.coefficients, xs[i]);
        total += r * r;
    }
    return total;
}

TEST(FitPoly, RecoversExactQuadratic) {
    const std::vector<double> xs = {0, 1, 2, 3, 4};
    std::vector<double> ys;
    for (double x : xs) {
        ys.push_back(2 * x * x + 3 * x + 1);
    }
    const PolyModel m = fit_poly(xs, ys, 2);
    ASSERT_EQ(m.coefficients.size(), 3u);
    EXPECT_NEAR(m.coefficients[0], 1, 1e-9);
    EXPECT_NEAR(m.coefficients[1], 3, 1e-9);
    EXPECT_NEAR(m.coefficients[2], 2, 1e-9);
    EXPECT_NEAR(m.r_squared, 1.0, 1e-12);
    EXPECT_EQ(m.domain, (Domain{0, 4}));
}

TEST(FitPoly, ConstantData) {
    const PolyModel m = fit_poly(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5}, 2);
    EXPECT_EQ(m.coefficients, (std::vector<double>{5, 0, 0}));
    EXPECT_EQ(m.r_squared, 1.0);
}

TEST(FitPoly, Errors) {
    const auto code = [](std::vector<double> xs, std::vector<double> ys) {
        try {
            fit_poly(xs, ys, 2);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Infeasible;
    };
    EXPECT_EQ(code({1, 2}, {1, 2}), ErrorCode::InsufficientPoints);
    EXPECT_EQ(code({1, 2, 2}, {1, 2, 3}), ErrorCode::DuplicateX);
    EXPECT_EQ(code({1, 2, 3}, {1, 2}), ErrorCode::InvalidInput);
    EXPECT_EQ(code({1, 2, NAN}, {1, 2, 3}), ErrorCode::InvalidInput);
}

TEST(FitPoly, NoiselessLowDegreeHasUnitRSquared) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coef(-5, 5);
    const auto grid = make_grid({1000, 60000, 11});
    for (int i = 0; i < 100; ++i) {
        const double c0 = coef(rng) * 1e4;
        const double c1 = coef(rng);
        const double c2 = (i % 3 == 0) ? 0.0 : coef(rng) * 1e-5;
        std::vector<double> ys;
        for (double x : grid) {
            ys.push_back(c0 + c1 * x + c2 * x * x);
        }
        const PolyModel m = fit_poly(grid, ys, 2);
        ASSERT_NEAR(m.r_squared, 1.0, 1e-9);
        ASSERT_NEAR(m.coefficients[0], c0, 1e-9 * std::max(1.0, std::abs(c0)) * 1e3);
        ASSERT_NEAR(m.coefficients[1], c1, 1e-9 * std::max(1.0, std::abs(c1)));
        ASSERT_NEAR(m.coefficients[2], c2, 1e-12);
    }
}

TEST(FitPoly, RSquaredMatchesHighPrecisionOracle) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> coef(-1, 1);
    const auto grid = make_grid({1000, 60000, 11});
    for (int i = 0; i < 100; ++i) {
        const double c0 = 1000 + coef(rng) * 500;
        const double c1 = coef(rng) * 0.05;
        const double c2 = coef(rng) * 1e-6;
        const double sigma = 50.0 + 400.0 * std::abs(coef(rng));
        std::vector<double> ys;
        for (double x : grid) {
            ys.push_back(c0 + c1 * x + c2 * x * x + sigma * noise(rng));
        }
        const PolyModel m = fit_poly(grid, ys, 2);
        const auto expected = oracle::normal_equations_fit(grid, ys, 2);
        ASSERT_NEAR(m.r_squared, expected[3], 1e-9);
        for (int k = 0; k < 3; ++k) {
            ASSERT_NEAR(m.coefficients[k], expected[k], 1e-7 * std::max(std::abs(expected[k]), 1e-9)) << "k=" << k;
        }
    }
}

TEST(FitPoly, PerturbationNeverImprovesResidual) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> xs;
        std::vector<double> ys;
        for (int k = 0; k < 12; ++k) {
            const double x = k * 10.0 + u(rng);
            xs.push_back(x);
            ys.push_back(3 + 0.5 * x - 0.01 * x * x + 5 * u(rng));
        }
        const PolyModel m = fit_poly(xs, ys, 2);
        const double base = ss_res(m, xs, ys);
        for (std::size_t k = 0; k < 3; ++k) {
            for (double sign : {-1.0, 1.0}) {
                PolyModel p = m;
                p.coefficients[k] *= 1.0 + sign * 1e-6;
                ASSERT_GE(ss_res(p, xs, ys), base * (1 - 1e-12));
            }
        }
    }
}

TEST(FitPoly, ScaleEquivariance) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> xs;
    std::vector<double> ys;
    for (int k = 0; k < 11; ++k) {
        xs.push_back(1 + k * 5.9);
        ys.push_back(400 - 3 * xs.back() + 0.02 * xs.back() * xs.back() + 10 * u(rng));
    }
    const PolyModel base = fit_poly(xs, ys, 2);
    for (double k : {10.0, 1000.0}) {
        std::vector<double> scaled;
        for (double x : xs) {
            scaled.push_back(x * k);
        }
        const PolyModel m = fit_poly(scaled, ys, 2);
        EXPECT_NEAR(m.coefficients[0], base.coefficients[0], 1e-6 * std::abs(base.coefficients[0]));
        EXPECT_NEAR(m.coefficients[1], base.coefficients[1] / k, 1e-6 * std::abs(base.coefficients[1] / k));
        EXPECT_NEAR(m.coefficients[2], base.coefficients[2] / (k * k), 1e-6 * std::abs(base.coefficients[2] / (k * k)));
    }
}

TEST(Predict, EvaluatesAndFlagsExtrapolation) {
    const PolyModel m{{1, 3, 2}, {0, 4}, 1.0};
    EXPECT_EQ(predict(m, 2).value, 15);
    EXPECT_FALSE(predict(m, 2).extrapolated);
    EXPECT_TRUE(predict(m, 5).extrapolated);
    const PolyModel flat{{5, 0, 0}, {0, 1}, 1.0};
    EXPECT_EQ(predict(flat, 123456).value, 5);
}

TEST(Predict, HornerMatchesNaiveOnFittedModel) {
    const PolyModel m = fit_poly(testing::reference_grid(),
                                 std::vector<double>{1447, 1100, 980, 900, 850, 810, 790, 780, 775, 772, 770}, 2);
    for (double x = m.domain.lo; x <= m.domain.hi; x += 137.0) {
        const double naive = oracle::naive_eval(m.coefficients, x);
        ASSERT_NEAR(predict(m, x).value, naive, 1e-12 * std::abs(naive));
    }
}

TEST(FitFamily, NoiselessQuadraticsFitExactly) {
    std::vector<ProfilingRunMetrics> runs;
    std::vector<TrtDataPoint> points;
    for (double ci : make_grid({1000, 60000, 11})) {
        runs.push_back({ci, 500, 1000, 2000 - 0.05 * ci + 4e-7 * ci * ci, 100, 100, 1000});
        points.push_back({ci, TrtEstimate{10000 + 0.1 * ci, 10000 + ci, 10000 + 2 * ci + 1e-6 * ci * ci, {}}});
    }
    const ProfilingDataset ds(runs);
    const ModelFamily family = fit_family(ds, points);
    for (const PolyModel* m : {&family.perf, &family.avail_min, &family.avail_avg, &family.avail_max}) {
        EXPECT_NEAR(m->r_squared, 1.0, 1e-9);
        EXPECT_EQ(m->domain, (Domain{1000, 60000}));
    }
}

TEST(FitFamily, MismatchedInputsAndTooFewRuns) {
    std::vector<ProfilingRunMetrics> runs = {{1000, 1, 2, 1, 1, 1, 1}, {2000, 1, 2, 1, 1, 1, 1}, {3000, 1, 2, 1, 1, 1, 1}};
    const ProfilingDataset ds(runs);
    EXPECT_THROW(fit_family(ds, derive_trt_points(std::span(runs).first(2))), Error);
    EXPECT_THROW(ProfilingDataset(std::vector(runs.begin(), runs.begin() + 2)), Error);
}

TEST(FitFamily, SimulatedDatasetBandAtTrainingPoints) {
    const ProfilingDataset& ds = testing::reference_profile().dataset;
    const auto points = derive_trt_points(ds);
    const ModelFamily family = fit_family(ds, points);
    for (const auto& run : ds.runs()) {
        EXPECT_GE(predict(family.avail_max, run.ci_ms).value, predict(family.avail_min, run.ci_ms).value);
    }
    for (const PolyModel* m : {&family.perf, &family.avail_min, &family.avail_avg, &family.avail_max}) {
        EXPECT_LE(m->r_squared, 1.0);
        EXPECT_TRUE(std::isfinite(m->r_squared));
    }
}

TEST(ModelsJson, RoundTripAndSchema) {
    const ModelFamily family{{{1, 2, 3}, {10, 20}, 0.5},
                             {{4, 5, 6}, {10, 20}, 0.25},
                             {{0.1, 0.2, 0.3}, {10, 20}, 0.9},
                             {{7, 8, 9}, {10, 20}, 1.0}};
    EXPECT_EQ(models_from_json(models_to_json(family)), family);
    EXPECT_THROW(models_from_json("{\"p\": {}}"), Error);
    EXPECT_THROW(models_from_json("[]"), Error);
}

} // namespace
} // namespace chiron
