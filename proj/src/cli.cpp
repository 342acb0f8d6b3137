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

#include "chiron/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "chiron/error.hpp"
#include "chiron/modeling.hpp"
#include "chiron/optimizer.hpp"
#include "chiron/profiling.hpp"
#include "chiron/simulator.hpp"

namespace chiron::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kCurveSamples = 200;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << content;
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

DataFormat format_for(const std::string& flag, const std::string& path) {
    if (!flag.empty()) {
        return parse_format(flag);
    }
    return fs::path(path).extension() == ".json" ? DataFormat::Json : DataFormat::Csv;
}

std::string observed_to_csv(std::span<const double> grid, std::span<const double> medians) {
    std::ostringstream out;
    out << "ci_ms,observed_trt_ms\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isnan(medians[i])) {
            out << format_number(grid[i]) << ',' << format_number(medians[i]) << '\n';
        }
    }
    return out.str();
}

std::string curve_csv(const PolyModel& model) {
    std::ostringstream out;
    out << "ci_ms,value\n";
    for (double x : make_grid({model.domain.lo, model.domain.hi, kCurveSamples})) {
        out << format_number(x) << ',' << format_number(predict(model, x).value) << '\n';
    }
    return out.str();
}

struct Options {
    std::string config;
    std::string failures;
    std::string out;
    std::string events;
    std::string observed;
    std::string dataset;
    std::string models;
    std::string recommendation;
    std::string format;
    std::string out_dir;
    std::string trt_case = "max";
    double ci_min = 1000.0;
    double ci_max = 60000.0;
    int count = 11;
    int repeats = 5;
    int failures_per_run = 3;
    int trials = 5;
    double c_trt = 0.0;
    bool clamp = false;
};

int cmd_simulate(const Options& o, std::ostream& out) {
    const SimConfig cfg = sim_config_from_json(read_file(o.config));
    const FailureSpec failures = o.failures.empty() ? FailureSpec::none() : failure_spec_from_json(read_file(o.failures));
    const SimOutcome outcome = run(cfg, failures);
    const std::string json = outcome_to_json(outcome);
    if (o.out.empty()) {
        out << json;
    } else {
        write_file(o.out, json);
    }
    if (!o.events.empty()) {
        write_file(o.events, event_log_to_csv(outcome.event_log));
    }
    return kExitOk;
}

int cmd_profile(const Options& o) {
    const SimConfig base = sim_config_from_json(read_file(o.config));
    const std::vector<double> grid = make_grid({o.ci_min, o.ci_max, o.count});
    const ProfileResult result = profile_grid(base, grid, o.failures_per_run, o.repeats);
    write_file(o.out, write_dataset(result.dataset, format_for(o.format, o.out)));
    if (!o.observed.empty()) {
        write_file(o.observed, observed_to_csv(grid, observed_trt_medians(result)));
    }
    return kExitOk;
}

int cmd_fit(const Options& o) {
    const ProfilingDataset dataset = read_dataset(read_file(o.dataset), format_for(o.format, o.dataset));
    const auto points = derive_trt_points(dataset);
    write_file(o.out, models_to_json(fit_family(dataset, points)));
    return kExitOk;
}

int cmd_optimize(const Options& o, std::ostream& out) {
    const ModelFamily family = models_from_json(read_file(o.models));
    const QosConstraint q(o.c_trt, parse_case(o.trt_case));
    const Recommendation rec = recommend(family, q, o.clamp);
    const std::string json = recommendation_to_json(rec, family);
    if (o.out.empty()) {
        out << json;
    } else {
        write_file(o.out, json);
    }
    return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
    const ModelFamily family = models_from_json(read_file(o.models));
    const Recommendation rec = recommendation_from_json(read_file(o.recommendation));
    const SimConfig base = sim_config_from_json(read_file(o.config));
    const std::string csv = validation_to_csv(validate(family, rec, base, o.trials));
    if (o.out.empty()) {
        out << csv;
    } else {
        write_file(o.out, csv);
    }
    return kExitOk;
}

int cmd_plotdata(const Options& o) {
    const ModelFamily family = models_from_json(read_file(o.models));
    const ProfilingDataset dataset = read_dataset(read_file(o.dataset), format_for(o.format, o.dataset));
    const auto points = derive_trt_points(dataset);

    const fs::path dir(o.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create '" + o.out_dir + "': " + ec.message());
    }
    write_file(dir / "curve_p.csv", curve_csv(family.perf));
    write_file(dir / "curve_a_min.csv", curve_csv(family.avail_min));
    write_file(dir / "curve_a_avg.csv", curve_csv(family.avail_avg));
    write_file(dir / "curve_a_max.csv", curve_csv(family.avail_max));

    std::ostringstream training;
    training << "ci_ms,l_avg_ms,trt_min_ms,trt_avg_ms,trt_max_ms\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& e = points[i].estimate;
        training << format_number(points[i].ci_ms) << ',' << format_number(dataset.runs()[i].l_avg_ms) << ','
                 << format_number(e.trt_min_ms) << ',' << format_number(e.trt_avg_ms) << ','
                 << format_number(e.trt_max_ms) << '\n';
    }
    write_file(dir / "training_points.csv", training.str());

    // Observed TRT medians come from `profile --observed`; without them the series is header-only.
    write_file(dir / "observed_trt.csv",
               o.observed.empty() ? std::string("ci_ms,observed_trt_ms\n") : read_file(o.observed));
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Checkpoint interval tuning for checkpoint/rollback stream processing jobs", "chiron"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "Run the failure/recovery simulator once");
    simulate->add_option("--config", o.config, "SimConfig JSON")->required();
    simulate->add_option("--failures", o.failures, "FailureSpec JSON (default: no failures)");
    simulate->add_option("--out", o.out, "SimOutcome JSON output (default: stdout)");
    simulate->add_option("--events", o.events, "Event log CSV output");

    auto* profile = app.add_subcommand("profile", "Simulate profiling runs over a checkpoint interval grid");
    profile->add_option("--config", o.config, "Base SimConfig JSON")->required();
    profile->add_option("--ci-min", o.ci_min, "Smallest checkpoint interval (ms)");
    profile->add_option("--ci-max", o.ci_max, "Largest checkpoint interval (ms)");
    profile->add_option("--count", o.count, "Number of grid points");
    profile->add_option("--repeats", o.repeats, "Profiling runs per interval (median is kept)");
    profile->add_option("--failures-per-run", o.failures_per_run, "Failures injected per run");
    profile->add_option("--out", o.out, "Dataset output path")->required();
    profile->add_option("--format", o.format, "csv or json (default: by extension)");
    profile->add_option("--observed", o.observed, "Observed TRT medians CSV output");

    auto* fit = app.add_subcommand("fit", "Fit performance and availability models");
    fit->add_option("--dataset", o.dataset, "Profiling dataset")->required();
    fit->add_option("--format", o.format, "csv or json (default: by extension)");
    fit->add_option("--out", o.out, "Models JSON output")->required();

    auto* optimize = app.add_subcommand("optimize", "Recommend a checkpoint interval for a TRT bound");
    optimize->add_option("--models", o.models, "Models JSON")->required();
    optimize->add_option("--c-trt", o.c_trt, "Upper bound on total recovery time (ms)")->required();
    optimize->add_option("--case", o.trt_case, "min, avg or max");
    optimize->add_flag("--clamp", o.clamp, "Fall back to a domain endpoint when no root is in range");
    optimize->add_option("--out", o.out, "Recommendation JSON output (default: stdout)");

    auto* validate_cmd = app.add_subcommand("validate", "Check a recommendation against fresh simulations");
    validate_cmd->add_option("--models", o.models, "Models JSON")->required();
    validate_cmd->add_option("--recommendation", o.recommendation, "Recommendation JSON")->required();
    validate_cmd->add_option("--config", o.config, "Base SimConfig JSON")->required();
    validate_cmd->add_option("--trials", o.trials, "Number of validation runs");
    validate_cmd->add_option("--out", o.out, "Report CSV output (default: stdout)");

    auto* plotdata = app.add_subcommand("plotdata", "Emit CSV series for plotting the fitted models");
    plotdata->add_option("--models", o.models, "Models JSON")->required();
    plotdata->add_option("--dataset", o.dataset, "Profiling dataset")->required();
    plotdata->add_option("--format", o.format, "csv or json (default: by extension)");
    plotdata->add_option("--observed", o.observed, "Observed TRT medians CSV from profile");
    plotdata->add_option("--out-dir", o.out_dir, "Output directory")->required();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(o, out);
        }
        if (profile->parsed()) {
            return cmd_profile(o);
        }
        if (fit->parsed()) {
            return cmd_fit(o);
        }
        if (optimize->parsed()) {
            return cmd_optimize(o, out);
        }
        if (validate_cmd->parsed()) {
            return cmd_validate(o, out);
        }
        return cmd_plotdata(o);
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        if (e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::OutOfDomain) {
            return kExitInfeasible;
        }
        return kExitInputError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
}

} // namespace chiron::cli
