#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "safenav/sim.hpp"

namespace safenav {

struct ScenarioParseError : std::runtime_error {
    explicit ScenarioParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace io_detail {

using nlohmann::json;

inline void expect_keys(const json& j, const char* where,
                        std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
        throw ScenarioParseError(std::string(where) + ": expected an object");
    }
    for (const char* k : keys) {
        if (!j.contains(k)) {
            throw ScenarioParseError(std::string(where) + ": missing key '" + k + "'");
        }
    }
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : keys) {
            if (item.key() == k) { known = true; break; }
        }
        if (!known) {
            throw ScenarioParseError(std::string(where) + ": unknown key '" + item.key() + "'");
        }
    }
}

inline double num(const json& j, const char* where, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number()) {
        throw ScenarioParseError(std::string(where) + "." + key + ": expected a number");
    }
    return v.get<double>();
}

inline Eigen::Matrix2d mat2(const json& j, const char* where, const char* key) {
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_array() || !v[1].is_array() ||
        v[0].size() != 2 || v[1].size() != 2) {
        throw ScenarioParseError(std::string(where) + "." + key + ": expected a 2x2 array");
    }
    Eigen::Matrix2d m;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            if (!v[r][c].is_number()) {
                throw ScenarioParseError(std::string(where) + "." + key + ": expected numbers");
            }
            m(r, c) = v[r][c].get<double>();
        }
    }
    return m;
}

inline Pose2 point(const json& j, const char* where) {
    expect_keys(j, where, {"x", "y"});
    return {num(j, where, "x"), num(j, where, "y")};
}

}  // namespace io_detail

inline Scenario parse_scenario(const std::string& text) {
    using nlohmann::json;
    using namespace io_detail;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioParseError(std::string("scenario: invalid JSON: ") + e.what());
    }
    expect_keys(j, "scenario", {"robot", "start", "goal", "controller", "obstacles", "sim"});

    Scenario sc;
    const json& r = j["robot"];
    expect_keys(r, "robot", {"r_r", "l", "v_max", "w_max"});
    sc.robot.r_r = num(r, "robot", "r_r");
    sc.robot.l = num(r, "robot", "l");
    sc.robot.v_max = num(r, "robot", "v_max");
    sc.robot.w_max = num(r, "robot", "w_max");

    const json& st = j["start"];
    expect_keys(st, "start", {"x", "y", "theta"});
    sc.start = RobotState(num(st, "start", "x"), num(st, "start", "y"),
                          num(st, "start", "theta"));

    const json& g = j["goal"];
    expect_keys(g, "goal", {"x", "y", "theta"});
    sc.goal = GoalPose(num(g, "goal", "x"), num(g, "goal", "y"), num(g, "goal", "theta"));

    const json& c = j["controller"];
    expect_keys(c, "controller", {"P", "gamma", "alpha", "H", "Q", "p_relax", "mode"});
    const json& P = c["P"];
    expect_keys(P, "controller.P", {"a1", "a2", "a3", "b1", "b2"});
    sc.controller.clf.a1 = num(P, "controller.P", "a1");
    sc.controller.clf.a2 = num(P, "controller.P", "a2");
    sc.controller.clf.a3 = num(P, "controller.P", "a3");
    sc.controller.clf.b1 = num(P, "controller.P", "b1");
    sc.controller.clf.b2 = num(P, "controller.P", "b2");
    sc.controller.clf.gamma = num(c, "controller", "gamma");
    sc.controller.cbf.alpha = num(c, "controller", "alpha");
    sc.controller.H = mat2(c, "controller", "H");
    sc.controller.Q = mat2(c, "controller", "Q");
    sc.controller.p_relax = num(c, "controller", "p_relax");
    const std::string mode = c.at("mode").is_string() ? c["mode"].get<std::string>() : "";
    if (mode == "offset") {
        sc.controller.cbf.mode = CbfMode::OffsetPoint;
    } else if (mode == "center") {
        sc.controller.cbf.mode = CbfMode::CenterPoint;
    } else {
        throw ScenarioParseError("controller.mode: expected \"offset\" or \"center\"");
    }

    const json& obs = j["obstacles"];
    if (!obs.is_array()) {
        throw ScenarioParseError("obstacles: expected an array");
    }
    for (const json& o : obs) {
        expect_keys(o, "obstacle", {"start", "end", "speed", "radius"});
        Obstacle ob;
        ob.start = point(o["start"], "obstacle.start");
        ob.end = point(o["end"], "obstacle.end");
        ob.speed = num(o, "obstacle", "speed");
        ob.radius = num(o, "obstacle", "radius");
        sc.obstacles.push_back(ob);
    }

    const json& sm = j["sim"];
    expect_keys(sm, "sim", {"dt", "t_max", "goal_pos_tol", "goal_ang_tol"});
    sc.dt = num(sm, "sim", "dt");
    sc.t_max = num(sm, "sim", "t_max");
    sc.goal_pos_tol = num(sm, "sim", "goal_pos_tol");
    sc.goal_ang_tol = num(sm, "sim", "goal_ang_tol");

    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioParseError(std::string("scenario: ") + e.what());
    }
    return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
    using nlohmann::json;
    json j;
    j["robot"] = {{"r_r", sc.robot.r_r}, {"l", sc.robot.l},
                  {"v_max", sc.robot.v_max}, {"w_max", sc.robot.w_max}};
    j["start"] = {{"x", sc.start.x_p}, {"y", sc.start.y_p}, {"theta", sc.start.theta}};
    j["goal"] = {{"x", sc.goal.x_g}, {"y", sc.goal.y_g}, {"theta", sc.goal.theta_g}};
    const ControllerConfig& c = sc.controller;
    j["controller"] = {
        {"P", {{"a1", c.clf.a1}, {"a2", c.clf.a2}, {"a3", c.clf.a3},
               {"b1", c.clf.b1}, {"b2", c.clf.b2}}},
        {"gamma", c.clf.gamma},
        {"alpha", c.cbf.alpha},
        {"H", {{c.H(0, 0), c.H(0, 1)}, {c.H(1, 0), c.H(1, 1)}}},
        {"Q", {{c.Q(0, 0), c.Q(0, 1)}, {c.Q(1, 0), c.Q(1, 1)}}},
        {"p_relax", c.p_relax},
        {"mode", c.cbf.mode == CbfMode::OffsetPoint ? "offset" : "center"},
    };
    j["obstacles"] = json::array();
    for (const Obstacle& o : sc.obstacles) {
        j["obstacles"].push_back({{"start", {{"x", o.start.x}, {"y", o.start.y}}},
                                  {"end", {{"x", o.end.x}, {"y", o.end.y}}},
                                  {"speed", o.speed},
                                  {"radius", o.radius}});
    }
    j["sim"] = {{"dt", sc.dt}, {"t_max", sc.t_max},
                {"goal_pos_tol", sc.goal_pos_tol}, {"goal_ang_tol", sc.goal_ang_tol}};
    return j;
}

inline std::string serialize_scenario(const Scenario& sc) {
    return scenario_to_json(sc).dump(2) + "\n";
}

inline const char* outcome_name(SimOutcome o) {
    switch (o) {
        case SimOutcome::GoalReached: return "GoalReached";
        case SimOutcome::Timeout: return "Timeout";
        case SimOutcome::Collision: return "Collision";
        case SimOutcome::SafetyInfeasible: return "SafetyInfeasible";
    }
    return "Unknown";
}

namespace io_detail {

// %.17g round-trips doubles exactly through strtod.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace io_detail

/// Trajectory table, one row per record:
/// t,x_p,y_p,theta,x_c,y_c,v,omega,delta,V,h_0,...,h_{N-1},solve_time
inline std::string trajectory_csv(const SimResult& result, std::size_t n_obstacles) {
    using io_detail::fmt;
    std::string out = "t,x_p,y_p,theta,x_c,y_c,v,omega,delta,V";
    for (std::size_t i = 0; i < n_obstacles; ++i) {
        out += ",h_" + std::to_string(i);
    }
    out += ",solve_time\n";
    for (const TrajectoryRecord& r : result.trajectory) {
        out += fmt(r.t);
        out += ',' + fmt(r.state.x_p) + ',' + fmt(r.state.y_p) + ',' + fmt(r.state.theta);
        out += ',' + fmt(r.center.x) + ',' + fmt(r.center.y);
        out += ',' + fmt(r.u.v) + ',' + fmt(r.u.omega);
        out += ',' + fmt(r.delta) + ',' + fmt(r.V);
        for (double h : r.h) out += ',' + fmt(h);
        out += ',' + fmt(r.solve_time);
        out += '\n';
    }
    return out;
}

inline nlohmann::json summary_json(const Scenario& sc, const SimResult& result) {
    using nlohmann::json;
    json j;
    j["outcome"] = outcome_name(result.outcome);
    j["time_to_goal"] = result.metrics.time_to_goal
                            ? json(*result.metrics.time_to_goal) : json(nullptr);
    j["min_h"] = result.metrics.min_h ? json(*result.metrics.min_h) : json(nullptr);
    j["mean_solve_time"] = result.metrics.mean_solve_time;
    j["max_solve_time"] = result.metrics.max_solve_time;
    j["steps"] = result.steps;
    j["config"] = scenario_to_json(sc);
    return j;
}

/// Write-temp-then-rename so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        f << content;
        f.flush();
        if (!f) {
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace safenav
