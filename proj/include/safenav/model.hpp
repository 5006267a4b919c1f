#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace safenav {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    if (!std::isfinite(a)) {
        throw std::invalid_argument("wrap_angle: non-finite angle");
    }
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) {
        r += 2.0 * kPi;
    }
    return r;
}

/// 2-D point, meters.
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
};

/// Unicycle state: rear-axle position and heading. theta is kept in (-pi, pi].
struct RobotState {
    double x_p = 0.0;
    double y_p = 0.0;
    double theta = 0.0;

    RobotState() = default;
    RobotState(double x, double y, double th) : x_p(x), y_p(y), theta(wrap_angle(th)) {
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw std::invalid_argument("RobotState: non-finite position");
        }
    }
};

/// Control pair (v, omega): linear and angular velocity.
struct ControlInput {
    double v = 0.0;
    double omega = 0.0;
};

/// Geometry and input bounds of the robot.
struct RobotParams {
    double r_r = 0.25;   // body radius, m
    double l = 0.15;     // rear axle to body center, m
    double v_max = 2.0;  // m/s
    double w_max = 1.5;  // rad/s

    void validate() const {
        if (!(r_r > 0.0)) throw std::invalid_argument("RobotParams: r_r must be > 0");
        if (!(l >= 0.0)) throw std::invalid_argument("RobotParams: l must be >= 0");
        if (!(l < r_r)) throw std::invalid_argument("RobotParams: l must be < r_r");
        if (!(v_max > 0.0)) throw std::invalid_argument("RobotParams: v_max must be > 0");
        if (!(w_max > 0.0)) throw std::invalid_argument("RobotParams: w_max must be > 0");
    }
};

/// Body center, l meters ahead of the rear axle along the heading.
inline Pose2 center_position(const RobotState& s, double l) {
    return {s.x_p + l * std::cos(s.theta), s.y_p + l * std::sin(s.theta)};
}

/// One forward-Euler step under zero-order-hold control.
inline RobotState step_euler(const RobotState& s, const ControlInput& u, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step_euler: dt must be > 0");
    }
    return RobotState(s.x_p + u.v * std::cos(s.theta) * dt,
                      s.y_p + u.v * std::sin(s.theta) * dt,
                      wrap_angle(s.theta + u.omega * dt));
}

/// Control-affine form xdot = f + g u of the unicycle: f = 0,
/// g = [[cos th, 0], [sin th, 0], [0, 1]].
struct AffineDecomposition {
    Eigen::Vector3d f;
    Eigen::Matrix<double, 3, 2> g;
};

inline AffineDecomposition affine_decomposition(const RobotState& s) {
    AffineDecomposition d;
    d.f.setZero();
    d.g << std::cos(s.theta), 0.0,
           std::sin(s.theta), 0.0,
           0.0,               1.0;
    return d;
}

}  // namespace safenav
