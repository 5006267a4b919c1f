#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "safenav/cbf.hpp"
#include "safenav/clf.hpp"
#include "safenav/controller.hpp"
#include "safenav/model.hpp"

namespace safenav {

struct Scenario {
    RobotState start;
    GoalPose goal;
    RobotParams robot;
    std::vector<Obstacle> obstacles;
    ControllerConfig controller;
    double dt = 0.1;
    double t_max = 30.0;
    double goal_pos_tol = 0.1;
    double goal_ang_tol = 0.15;

    void validate() const {
        robot.validate();
        controller.validate();
        for (const Obstacle& o : obstacles) o.validate();
        if (!std::isfinite(goal.x_g) || !std::isfinite(goal.y_g)) {
            throw std::invalid_argument("Scenario: non-finite goal");
        }
        if (!(dt > 0.0)) throw std::invalid_argument("Scenario: dt must be > 0");
        if (!(t_max >= dt)) throw std::invalid_argument("Scenario: t_max must be >= dt");
        if (!(goal_pos_tol > 0.0) || !(goal_ang_tol > 0.0)) {
            throw std::invalid_argument("Scenario: goal tolerances must be > 0");
        }
    }
};

enum class SimOutcome { GoalReached, Timeout, Collision, SafetyInfeasible };

struct TrajectoryRecord {
    double t = 0.0;
    RobotState state;
    Pose2 center;
    ControlInput u;
    double delta = 0.0;
    double V = 0.0;
    std::vector<double> h;
    double solve_time = 0.0;
};

struct SimMetrics {
    std::optional<double> time_to_goal;
    std::optional<double> min_h;  // empty when the scenario has no obstacles
    double mean_solve_time = 0.0;
    double max_solve_time = 0.0;
};

struct SimResult {
    SimOutcome outcome = SimOutcome::Timeout;
    std::vector<TrajectoryRecord> trajectory;  // one row per control step + terminal row
    SimMetrics metrics;
    int steps = 0;
};

inline bool goal_reached(const RobotState& s, const GoalPose& goal, double pos_tol,
                         double ang_tol) {
    return std::hypot(s.x_p - goal.x_g, s.y_p - goal.y_g) < pos_tol &&
           std::abs(wrap_angle(s.theta - goal.theta_g)) < ang_tol;
}

/// Closed-loop simulation. Each iteration checks (in order) goal, collision
/// and timeout on the current state, then solves the controller QP, records,
/// and integrates one Euler step under zero-order hold. Collision is always
/// judged at the body center (rear axle + l along the heading) regardless of
/// the CBF mode. Deterministic for a given scenario.
inline SimResult run(const Scenario& sc) {
    sc.validate();
    SimResult result;
    RobotState s = sc.start;
    ControlInput u_pre{0.0, 0.0};
    std::vector<int> warm;

    const auto record_at = [&](double t, const RobotState& st, const ControlStepResult* ctl) {
        TrajectoryRecord rec;
        rec.t = t;
        rec.state = st;
        rec.center = center_position(st, sc.robot.l);
        rec.V = clf_value(st, sc.goal, sc.controller.clf);
        if (ctl != nullptr) {
            rec.u = ctl->u;
            rec.delta = ctl->delta;
            rec.h = ctl->h_values;
            rec.solve_time = ctl->solve_time;
        } else {
            rec.h.reserve(sc.obstacles.size());
            for (const Obstacle& o : sc.obstacles) {
                const ObstacleState os = obstacle_state(o, t);
                rec.h.push_back(cbf_value(st, os.pos, sc.robot.l,
                                          sc.robot.r_r + o.radius + sc.controller.cbf.margin,
                                          sc.controller.cbf.mode));
            }
        }
        result.trajectory.push_back(std::move(rec));
    };

    for (int j = 0;; ++j) {
        const double t = j * sc.dt;

        if (goal_reached(s, sc.goal, sc.goal_pos_tol, sc.goal_ang_tol)) {
            record_at(t, s, nullptr);
            result.outcome = SimOutcome::GoalReached;
            result.metrics.time_to_goal = t;
            break;
        }
        bool collided = false;
        const Pose2 c = center_position(s, sc.robot.l);
        for (const Obstacle& o : sc.obstacles) {
            const ObstacleState os = obstacle_state(o, t);
            if (std::hypot(c.x - os.pos.x, c.y - os.pos.y) < sc.robot.r_r + o.radius) {
                collided = true;
                break;
            }
        }
        if (collided) {
            record_at(t, s, nullptr);
            result.outcome = SimOutcome::Collision;
            break;
        }
        if (t >= sc.t_max) {
            record_at(t, s, nullptr);
            result.outcome = SimOutcome::Timeout;
            break;
        }

        const ControlStepResult ctl = control_step(s, sc.goal, sc.obstacles, t,
                                                   sc.controller, sc.robot, u_pre, warm);
        if (ctl.qp_status == QpStatus::Infeasible) {
            record_at(t, s, nullptr);
            result.outcome = SimOutcome::SafetyInfeasible;
            break;
        }
        record_at(t, s, &ctl);
        s = step_euler(s, ctl.u, sc.dt);
        u_pre = ctl.u;
        warm = ctl.active_set;
        ++result.steps;
    }

    double sum_solve = 0.0;
    for (int i = 0; i < result.steps; ++i) {
        const TrajectoryRecord& r = result.trajectory[i];
        sum_solve += r.solve_time;
        result.metrics.max_solve_time = std::max(result.metrics.max_solve_time, r.solve_time);
    }
    if (result.steps > 0) {
        result.metrics.mean_solve_time = sum_solve / result.steps;
    }
    if (!sc.obstacles.empty()) {
        double mh = std::numeric_limits<double>::infinity();
        for (const TrajectoryRecord& r : result.trajectory) {
            for (double h : r.h) mh = std::min(mh, h);
        }
        result.metrics.min_h = mh;
    }
    return result;
}

/// Maximal disjoint [t_begin, t_end] runs of records with delta > threshold.
inline std::vector<std::pair<double, double>> relaxation_activity_intervals(
    const SimResult& result, double threshold) {
    if (!(threshold > 0.0)) {
        throw std::invalid_argument("relaxation_activity_intervals: threshold must be > 0");
    }
    std::vector<std::pair<double, double>> intervals;
    bool open = false;
    for (const TrajectoryRecord& r : result.trajectory) {
        if (r.delta > threshold) {
            if (!open) {
                intervals.emplace_back(r.t, r.t);
                open = true;
            } else {
                intervals.back().second = r.t;
            }
        } else {
            open = false;
        }
    }
    return intervals;
}

}  // namespace safenav
