#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "safenav/model.hpp"

namespace safenav {

/// Circular obstacle moving from start to end at constant speed, then stopping.
/// speed == 0 marks a static obstacle (end is ignored).
struct Obstacle {
    Pose2 start;
    Pose2 end;
    double speed = 0.0;   // m/s
    double radius = 0.5;  // m

    void validate() const {
        if (!std::isfinite(start.x) || !std::isfinite(start.y) ||
            !std::isfinite(end.x) || !std::isfinite(end.y)) {
            throw std::invalid_argument("Obstacle: non-finite endpoint");
        }
        if (!(speed >= 0.0)) throw std::invalid_argument("Obstacle: speed must be >= 0");
        if (!(radius > 0.0)) throw std::invalid_argument("Obstacle: radius must be > 0");
        if (speed > 0.0 && start.x == end.x && start.y == end.y) {
            throw std::invalid_argument("Obstacle: moving obstacle needs start != end");
        }
    }
};

/// Which point the barrier constrains. OffsetPoint places it at the body
/// center x_p + l e(theta), so steering enters L_g h and the robot can turn
/// away from obstacles; CenterPoint treats the state coordinates as the
/// center, the traditional degraded form whose omega coefficient vanishes.
enum class CbfMode { OffsetPoint, CenterPoint };

struct CbfParams {
    double alpha = 1.5;  // constant-scalar class-K rate, 1/s
    CbfMode mode = CbfMode::OffsetPoint;
    double margin = 0.0;  // extra inflation added to r_safe, m

    void validate() const {
        if (!(alpha > 0.0)) throw std::invalid_argument("CbfParams: alpha must be > 0");
        if (!(margin >= 0.0)) throw std::invalid_argument("CbfParams: margin must be >= 0");
    }
};

struct ObstacleState {
    Pose2 pos;
    Eigen::Vector2d vel;
};

/// Position and velocity at time t. Constant velocity along the segment,
/// zero after arrival.
inline ObstacleState obstacle_state(const Obstacle& o, double t) {
    if (o.speed == 0.0) {
        return {o.start, Eigen::Vector2d::Zero()};
    }
    const double dx = o.end.x - o.start.x;
    const double dy = o.end.y - o.start.y;
    const double dist = std::hypot(dx, dy);
    const double travel_time = dist / o.speed;
    if (t >= travel_time) {
        return {o.end, Eigen::Vector2d::Zero()};
    }
    const Eigen::Vector2d vel(o.speed * dx / dist, o.speed * dy / dist);
    return {{o.start.x + vel[0] * t, o.start.y + vel[1] * t}, vel};
}

/// h = |p - p_O|^2 - r_safe^2 where p is the constrained point for the mode.
inline double cbf_value(const RobotState& s, const Pose2& o_pos, double l,
                        double r_safe, CbfMode mode) {
    const double ll = (mode == CbfMode::OffsetPoint) ? l : 0.0;
    const double dx = s.x_p + ll * std::cos(s.theta) - o_pos.x;
    const double dy = s.y_p + ll * std::sin(s.theta) - o_pos.y;
    return dx * dx + dy * dy - r_safe * r_safe;
}

/// Affine CBF constraint coefficients: the row of the controller QP reads
/// coeff_u . u + rhs_offset >= 0 with coeff_u = L_g h and
/// rhs_offset = dh/dt + alpha h (L_f h = 0).
struct CbfRow {
    Eigen::Vector2d coeff_u;
    double rhs_offset = 0.0;
    double h = 0.0;
};

inline CbfRow cbf_row(const RobotState& s, const Obstacle& o, double t,
                      const RobotParams& robot, const CbfParams& p) {
    const ObstacleState os = obstacle_state(o, t);
    const double ll = (p.mode == CbfMode::OffsetPoint) ? robot.l : 0.0;
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double dx = s.x_p + ll * c - os.pos.x;
    const double dy = s.y_p + ll * sn - os.pos.y;
    const double r_safe = robot.r_r + o.radius + p.margin;

    CbfRow row;
    row.h = dx * dx + dy * dy - r_safe * r_safe;
    row.coeff_u[0] = 2.0 * dx * c + 2.0 * dy * sn;
    row.coeff_u[1] = (p.mode == CbfMode::OffsetPoint)
                         ? (-2.0 * dx * ll * sn + 2.0 * dy * ll * c)
                         : 0.0;
    const double dh_dt = -2.0 * dx * os.vel[0] - 2.0 * dy * os.vel[1];
    row.rhs_offset = dh_dt + p.alpha * row.h;
    return row;
}

/// ||L_g h|| > tol; in offset-point form this fails only when the offset
/// point coincides with the obstacle center.
inline bool check_nondegenerate(const RobotState& s, const Pose2& o_pos, double l,
                                double tol = 1e-9) {
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double dx = s.x_p + l * c - o_pos.x;
    const double dy = s.y_p + l * sn - o_pos.y;
    const double gv = 2.0 * dx * c + 2.0 * dy * sn;
    const double gw = -2.0 * dx * l * sn + 2.0 * dy * l * c;
    return std::hypot(gv, gw) > tol;
}

}  // namespace safenav
