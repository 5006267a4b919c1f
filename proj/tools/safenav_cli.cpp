// safenav: CLF-CBF-QP unicycle navigation simulator.
//
// Subcommands:
//   run   --scenario PATH --out DIR [--mode offset|center] [--dt SECONDS]
//   batch --glob PATTERN --out DIR [--jobs N]
//
// Exit codes: 0 GoalReached, 2 Collision, 3 Timeout, 4 SafetyInfeasible,
// 1 usage/parse/io errors. SAFE_NAV_LOG={error,info,debug} sets verbosity.

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "safenav/safenav.hpp"

namespace fs = std::filesystem;
using namespace safenav;

namespace {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("SAFE_NAV_LOG");
    if (env == nullptr) return LogLevel::Info;
    const std::string v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
}

std::mutex log_mutex;

void log(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) <= static_cast<int>(log_level())) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::cerr << msg << "\n";
    }
}

int exit_code_for(SimOutcome o) {
    switch (o) {
        case SimOutcome::GoalReached: return 0;
        case SimOutcome::Collision: return 2;
        case SimOutcome::Timeout: return 3;
        case SimOutcome::SafetyInfeasible: return 4;
    }
    return 1;
}

std::string one_line_summary(const SimResult& r) {
    std::ostringstream os;
    os << "outcome=" << outcome_name(r.outcome);
    os << " time_to_goal=";
    if (r.metrics.time_to_goal) os << *r.metrics.time_to_goal; else os << "n/a";
    os << " min_h=";
    if (r.metrics.min_h) os << *r.metrics.min_h; else os << "n/a";
    os << " mean_solve_time=" << r.metrics.mean_solve_time;
    return os.str();
}

struct RunOutput {
    int exit_code = 1;
    std::optional<SimResult> result;
    std::string error;
};

RunOutput run_one(const fs::path& scenario_path, const fs::path& out_dir,
                  const std::string& name_prefix, const std::string& mode_override,
                  double dt_override) {
    RunOutput out;
    std::ifstream f(scenario_path);
    if (!f) {
        out.error = "scenario not found: " + scenario_path.string();
        return out;
    }
    std::ostringstream buf;
    buf << f.rdbuf();

    Scenario sc;
    try {
        sc = parse_scenario(buf.str());
    } catch (const ScenarioParseError& e) {
        out.error = "malformed scenario " + scenario_path.string() + ": " + e.what();
        return out;
    }
    if (mode_override == "offset") sc.controller.cbf.mode = CbfMode::OffsetPoint;
    if (mode_override == "center") sc.controller.cbf.mode = CbfMode::CenterPoint;
    if (dt_override > 0.0) sc.dt = dt_override;

    log(LogLevel::Debug, "running " + scenario_path.string());
    const SimResult result = run(sc);

    try {
        fs::create_directories(out_dir);
        write_file_atomic(out_dir / (name_prefix + "trajectory.csv"),
                          trajectory_csv(result, sc.obstacles.size()));
        write_file_atomic(out_dir / (name_prefix + "summary.json"),
                          summary_json(sc, result).dump(2) + "\n");
    } catch (const std::exception& e) {
        out.error = std::string("cannot write output: ") + e.what();
        return out;
    }
    out.exit_code = exit_code_for(result.outcome);
    out.result = result;
    return out;
}

int cmd_run(const std::string& scenario, const std::string& out_dir,
            const std::string& mode, double dt) {
    const RunOutput r = run_one(scenario, out_dir, "", mode, dt);
    if (!r.result) {
        log(LogLevel::Error, "error: " + r.error);
        return 1;
    }
    std::cout << one_line_summary(*r.result) << "\n";
    return r.exit_code;
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
    std::vector<fs::path> files;
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) {
            files.emplace_back(g.gl_pathv[i]);
        }
    }
    ::globfree(&g);
    std::sort(files.begin(), files.end());
    return files;
}

int cmd_batch(const std::string& pattern, const std::string& out_dir, int jobs) {
    const std::vector<fs::path> files = expand_glob(pattern);
    if (files.empty()) {
        log(LogLevel::Error, "error: no scenarios match glob: " + pattern);
        return 1;
    }
    std::vector<RunOutput> results(files.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(files.size())));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int wi = 0; wi < workers; ++wi) {
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
                const std::string stem = files[i].stem().string();
                results[i] = run_one(files[i], out_dir, stem + "_", "", 0.0);
            }
        });
    }
    for (std::thread& th : pool) th.join();

    std::string agg = "name,outcome,time_to_goal,min_h,mean_solve_time\n";
    int worst = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string stem = files[i].stem().string();
        const RunOutput& r = results[i];
        if (!r.result) {
            log(LogLevel::Error, "error: " + r.error);
            agg += stem + ",Error,,,\n";
            worst = std::max(worst, 1);
            continue;
        }
        const SimMetrics& m = r.result->metrics;
        agg += stem;
        agg += ',' + std::string(outcome_name(r.result->outcome));
        agg += ',' + (m.time_to_goal ? std::to_string(*m.time_to_goal) : std::string());
        agg += ',' + (m.min_h ? std::to_string(*m.min_h) : std::string());
        agg += ',' + std::to_string(m.mean_solve_time);
        agg += '\n';
        log(LogLevel::Info, stem + ": " + one_line_summary(*r.result));
        worst = std::max(worst, r.exit_code);
    }
    try {
        fs::create_directories(out_dir);
        write_file_atomic(fs::path(out_dir) / "aggregate.csv", agg);
    } catch (const std::exception& e) {
        log(LogLevel::Error, std::string("error: cannot write output: ") + e.what());
        return 1;
    }
    std::cout << "batch: " << files.size() << " scenario(s), worst exit " << worst << "\n";
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CLF-CBF-QP unicycle navigation simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, mode;
    double dt = 0.0;
    CLI::App* run_cmd = app.add_subcommand("run", "simulate one scenario file");
    run_cmd->add_option("--scenario", scenario_path, "scenario JSON path")->required();
    run_cmd->add_option("--out", out_dir, "output directory")->required();
    run_cmd->add_option("--mode", mode, "override CBF mode")
        ->check(CLI::IsMember({"offset", "center"}));
    run_cmd->add_option("--dt", dt, "override simulation time step")
        ->check(CLI::PositiveNumber);

    std::string pattern, batch_out;
    int jobs = 1;
    CLI::App* batch_cmd = app.add_subcommand("batch", "simulate every matching scenario");
    batch_cmd->add_option("--glob", pattern, "scenario glob pattern")->required();
    batch_cmd->add_option("--out", batch_out, "output directory")->required();
    batch_cmd->add_option("--jobs", jobs, "parallel scenario runs")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(scenario_path, out_dir, mode, dt);
        }
        return cmd_batch(pattern, batch_out, jobs);
    } catch (const std::exception& e) {
        log(LogLevel::Error, std::string("error: ") + e.what());
        return 1;
    }
}
