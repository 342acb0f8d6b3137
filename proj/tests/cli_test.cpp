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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "chiron/cli.hpp"
#include "chiron/modeling.hpp"
#include "support/oracles.hpp"
#include "support/reference.hpp"

namespace chiron {
namespace {

namespace fs = std::filesystem;
using testing::data_path;

class CliTest : public ::testing::Test {
protected:
    fs::path dir;
    std::string stdout_text;
    std::string stderr_text;

    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("chiron_cli_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    void TearDown() override { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    int chiron(std::vector<std::string> args) {
        args.insert(args.begin(), "chiron");
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(args, out, err);
        stdout_text = out.str();
        stderr_text = err.str();
        return code;
    }

    void write(const std::string& name, const std::string& content) const {
        std::ofstream(path(name), std::ios::binary) << content;
    }
};

TEST_F(CliTest, SimulateMatchesGolden) {
    ASSERT_EQ(chiron({"simulate", "--config", data_path("reference_config.json"), "--failures",
                      data_path("golden_failures.json"), "--out", path("outcome.json"), "--events",
                      path("events.csv")}),
              cli::kExitOk)
        << stderr_text;
    EXPECT_EQ(oracle::slurp(path("outcome.json")), oracle::slurp(data_path("golden_outcome.json")));
    EXPECT_EQ(oracle::slurp(path("events.csv")), oracle::slurp(data_path("golden_events.csv")));

    ASSERT_EQ(chiron({"simulate", "--config", data_path("reference_config.json"), "--failures",
                      data_path("golden_failures.json")}),
              cli::kExitOk);
    EXPECT_EQ(stdout_text, oracle::slurp(data_path("golden_outcome.json")));
}

TEST_F(CliTest, ProfileMatchesGoldenAndIsByteStable) {
    for (const std::string name : {"a.csv", "b.csv"}) {
        ASSERT_EQ(chiron({"profile", "--config", data_path("reference_config.json"), "--out", path(name),
                          "--observed", path("observed_" + name)}),
                  cli::kExitOk)
            << stderr_text;
    }
    EXPECT_EQ(oracle::slurp(path("a.csv")), oracle::slurp(path("b.csv")));
    EXPECT_EQ(oracle::slurp(path("a.csv")), oracle::slurp(data_path("golden_dataset.csv")));
    EXPECT_EQ(oracle::slurp(path("observed_a.csv")), oracle::slurp(data_path("golden_observed.csv")));

    ASSERT_EQ(chiron({"profile", "--config", data_path("reference_config.json"), "--out", path("d.json")}),
              cli::kExitOk);
    EXPECT_EQ(read_dataset(oracle::slurp(path("d.json")), DataFormat::Json),
              read_dataset(oracle::slurp(path("a.csv")), DataFormat::Csv));
}

TEST_F(CliTest, FitAndOptimizeMatchGolden) {
    ASSERT_EQ(chiron({"fit", "--dataset", data_path("golden_dataset.csv"), "--out", path("models.json")}),
              cli::kExitOk)
        << stderr_text;
    EXPECT_EQ(oracle::slurp(path("models.json")), oracle::slurp(data_path("golden_models.json")));

    const auto golden_rec = nlohmann::json::parse(oracle::slurp(data_path("golden_recommendation.json")));
    const std::string c_trt = format_number(golden_rec["c_trt_ms"].get<double>());
    ASSERT_EQ(chiron({"optimize", "--models", path("models.json"), "--c-trt", c_trt, "--case", "max"}), cli::kExitOk)
        << stderr_text;
    EXPECT_EQ(stdout_text, oracle::slurp(data_path("golden_recommendation.json")));
}

TEST_F(CliTest, ValidateReportsEachTrial) {
    ASSERT_EQ(chiron({"validate", "--models", data_path("golden_models.json"), "--recommendation",
                      data_path("golden_recommendation.json"), "--config", data_path("reference_config.json"),
                      "--trials", "3", "--out", path("report.csv")}),
              cli::kExitOk)
        << stderr_text;
    std::istringstream lines(oracle::slurp(path("report.csv")));
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "trial,actual_trt_s,constraint_satisfied,actual_l_avg_ms,percent_error");
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        EXPECT_EQ(line.rfind(std::to_string(rows) + ",", 0), 0u) << line;
    }
    EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, PlotdataWritesSeries) {
    ASSERT_EQ(chiron({"plotdata", "--models", data_path("golden_models.json"), "--dataset",
                      data_path("golden_dataset.csv"), "--observed", data_path("golden_observed.csv"), "--out-dir",
                      path("plots")}),
              cli::kExitOk)
        << stderr_text;
    const ModelFamily family = models_from_json(oracle::slurp(data_path("golden_models.json")));
    for (const std::string name : {"curve_p.csv", "curve_a_min.csv", "curve_a_avg.csv", "curve_a_max.csv"}) {
        std::istringstream lines(oracle::slurp(path("plots/" + name)));
        std::string line;
        std::getline(lines, line);
        EXPECT_EQ(line, "ci_ms,value");
        std::vector<double> xs;
        while (std::getline(lines, line)) {
            xs.push_back(std::stod(line.substr(0, line.find(','))));
        }
        ASSERT_EQ(xs.size(), 200u) << name;
        EXPECT_EQ(xs.front(), family.perf.domain.lo);
        EXPECT_EQ(xs.back(), family.perf.domain.hi);
    }
    EXPECT_EQ(oracle::slurp(path("plots/observed_trt.csv")), oracle::slurp(data_path("golden_observed.csv")));
    const std::string training = oracle::slurp(path("plots/training_points.csv"));
    EXPECT_EQ(training.rfind("ci_ms,l_avg_ms,trt_min_ms,trt_avg_ms,trt_max_ms\n1000,", 0), 0u);

    ASSERT_EQ(chiron({"plotdata", "--models", data_path("golden_models.json"), "--dataset",
                      data_path("golden_dataset.csv"), "--out-dir", path("bare")}),
              cli::kExitOk);
    EXPECT_EQ(oracle::slurp(path("bare/observed_trt.csv")), "ci_ms,observed_trt_ms\n");
}

TEST_F(CliTest, InputErrorsExitTwo) {
    write("bad.json", "{\"i_avg_eps\": ");
    EXPECT_EQ(chiron({"simulate", "--config", path("bad.json")}), cli::kExitInputError);
    EXPECT_NE(stderr_text.find("SchemaError"), std::string::npos) << stderr_text;

    write("two.csv", "ci_ms,i_avg_eps,i_max_eps,l_avg_ms,r_avg_ms,w_avg_ms,timeout_ms\n"
                     "1000,10,20,5,1,1,100\n2000,10,20,4,1,1,100\n");
    EXPECT_EQ(chiron({"fit", "--dataset", path("two.csv"), "--out", path("m.json")}), cli::kExitInputError);
    EXPECT_FALSE(fs::exists(path("m.json")));

    EXPECT_EQ(chiron({"profile", "--config", data_path("reference_config.json"), "--count", "1", "--out",
                      path("p.csv")}),
              cli::kExitInputError);
    EXPECT_EQ(chiron({"simulate", "--config", path("missing.json")}), cli::kExitInputError);
    EXPECT_EQ(chiron({"frobnicate"}), cli::kExitInputError);
    EXPECT_EQ(chiron({"optimize", "--models", data_path("golden_models.json"), "--c-trt", "-5"}),
              cli::kExitInputError);
}

TEST_F(CliTest, InfeasibleExitsThree) {
    EXPECT_EQ(chiron({"optimize", "--models", data_path("golden_models.json"), "--c-trt", "1000"}),
              cli::kExitInfeasible);
    EXPECT_EQ(chiron({"optimize", "--models", data_path("golden_models.json"), "--c-trt", "1000", "--clamp"}),
              cli::kExitInfeasible);
    EXPECT_TRUE(stdout_text.empty());
}

TEST_F(CliTest, HelpExitsZero) {
    EXPECT_EQ(chiron({"--help"}), cli::kExitOk);
    EXPECT_NE(stdout_text.find("optimize"), std::string::npos);
}

} // namespace
} // namespace chiron
