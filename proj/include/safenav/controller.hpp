#pragma once

#include <chrono>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "safenav/cbf.hpp"
#include "safenav/clf.hpp"
#include "safenav/model.hpp"
#include "safenav/qp.hpp"

namespace safenav {

/// All knobs of the CLF-CBF-QP controller.
struct ControllerConfig {
    ClfParams clf;
    CbfParams cbf;
    Eigen::Matrix2d H = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d Q = 5.0 * Eigen::Matrix2d::Identity();
    double p_relax = 1000.0;

    void validate() const {
        clf.validate();
        cbf.validate();
        if (Eigen::LLT<Eigen::Matrix2d>(H).info() != Eigen::Success ||
            (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw std::invalid_argument("ControllerConfig: H must be symmetric PD");
        }
        if (Eigen::LLT<Eigen::Matrix2d>(Q).info() != Eigen::Success ||
            (Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw std::invalid_argument("ControllerConfig: Q must be symmetric PD");
        }
        if (!(p_relax > 0.0)) {
            throw std::invalid_argument("ControllerConfig: p_relax must be > 0");
        }
    }
};

struct ControlStepResult {
    ControlInput u;
    double delta = 0.0;
    double V = 0.0;
    std::vector<double> h_values;
    double solve_time = 0.0;  // seconds
    QpStatus qp_status = QpStatus::Optimal;
    std::vector<int> active_set;
};

/// Builds the QP of the CLF-CBF controller over z = (v, omega, delta).
///
/// Objective 1/2 u'Hu + p delta^2 + (u - u_pre)'Q(u - u_pre) expands to
/// M = blockdiag(H + 2Q, 2p), q = (-2Q u_pre, 0) after dropping the constant.
/// Row order: CLF row, one CBF row per obstacle, then the four input box rows.
inline QpProblem assemble_qp(const RobotState& s, const GoalPose& goal,
                             std::span<const Obstacle> obstacles, double t,
                             const ControllerConfig& cfg, const RobotParams& robot,
                             const ControlInput& u_pre) {
    QpProblem p;
    p.M.setZero();
    p.M.topLeftCorner<2, 2>() = cfg.H + 2.0 * cfg.Q;
    p.M(2, 2) = 2.0 * cfg.p_relax;
    p.q.setZero();
    p.q.head<2>() = -2.0 * cfg.Q * Eigen::Vector2d(u_pre.v, u_pre.omega);

    const int n_obs = static_cast<int>(obstacles.size());
    p.A.resize(n_obs + 5, 3);
    p.b.resize(n_obs + 5);

    const ClfRow clf = clf_constraint_row(s, goal, cfg.clf);
    p.A.row(0) << clf.coeff_u[0], clf.coeff_u[1], -1.0;
    p.b[0] = -clf.rhs_offset;

    for (int i = 0; i < n_obs; ++i) {
        const CbfRow row = cbf_row(s, obstacles[i], t, robot, cfg.cbf);
        p.A.row(1 + i) << -row.coeff_u[0], -row.coeff_u[1], 0.0;
        p.b[1 + i] = row.rhs_offset;
    }

    const int base = 1 + n_obs;
    p.A.row(base + 0) << 1.0, 0.0, 0.0;
    p.b[base + 0] = robot.v_max;
    p.A.row(base + 1) << -1.0, 0.0, 0.0;
    p.b[base + 1] = robot.v_max;
    p.A.row(base + 2) << 0.0, 1.0, 0.0;
    p.b[base + 2] = robot.w_max;
    p.A.row(base + 3) << 0.0, -1.0, 0.0;
    p.b[base + 3] = robot.w_max;
    return p;
}

/// One controller evaluation: assemble, solve, report diagnostics. The
/// previous step's active set may be passed through as a warm start.
inline ControlStepResult control_step(const RobotState& s, const GoalPose& goal,
                                      std::span<const Obstacle> obstacles, double t,
                                      const ControllerConfig& cfg,
                                      const RobotParams& robot,
                                      const ControlInput& u_pre,
                                      std::span<const int> warm_start = {}) {
    const QpProblem qp = assemble_qp(s, goal, obstacles, t, cfg, robot, u_pre);

    ControlStepResult res;
    res.V = clf_value(s, goal, cfg.clf);
    res.h_values.reserve(obstacles.size());
    for (const Obstacle& o : obstacles) {
        const ObstacleState os = obstacle_state(o, t);
        res.h_values.push_back(cbf_value(s, os.pos, robot.l,
                                         robot.r_r + o.radius + cfg.cbf.margin,
                                         cfg.cbf.mode));
    }

    const ActiveSetQp solver;
    const auto t0 = std::chrono::steady_clock::now();
    const QpSolution sol = solver.solve(qp, warm_start);
    const auto t1 = std::chrono::steady_clock::now();
    res.solve_time = std::chrono::duration<double>(t1 - t0).count();

    res.qp_status = sol.status;
    res.active_set = sol.active_set;
    if (sol.status == QpStatus::Optimal) {
        res.u = {sol.z[0], sol.z[1]};
        res.delta = sol.z[2];
    }
    return res;
}

}  // namespace safenav
