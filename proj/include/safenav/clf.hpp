#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "safenav/model.hpp"

namespace safenav {

/// Goal pose for navigation; theta_g kept in (-pi, pi].
struct GoalPose {
    double x_g = 0.0;
    double y_g = 0.0;
    double theta_g = 0.0;

    GoalPose() = default;
    GoalPose(double x, double y, double th) : x_g(x), y_g(y), theta_g(wrap_angle(th)) {}
};

/// Parameters of the quadratic CLF V = e' P e with
///
///         [a1  0  b1]
///     P = [ 0 a2  b2]
///         [b1 b2  a3]
///
/// P must be positive definite; gamma is the constant-scalar class-K rate.
struct ClfParams {
    double a1 = 2.0;
    double a2 = 4.0;
    double a3 = 2.0;
    double b1 = 0.0;
    double b2 = 0.8;
    double gamma = 0.5;

    Eigen::Matrix3d P() const {
        Eigen::Matrix3d p;
        p << a1, 0.0, b1,
             0.0, a2, b2,
             b1, b2, a3;
        return p;
    }

    // Leading principal minors: a1 > 0, a1*a2 > 0, det(P) > 0.
    void validate() const {
        const double det = a1 * a2 * a3 - a1 * b2 * b2 - a2 * b1 * b1;
        if (!(a1 > 0.0) || !(a1 * a2 > 0.0) || !(det > 0.0)) {
            throw std::invalid_argument("ClfParams: P is not positive definite");
        }
        if (!(gamma > 0.0)) {
            throw std::invalid_argument("ClfParams: gamma must be > 0");
        }
    }
};

/// e = (x_p - x_g, y_p - y_g, wrap(theta - theta_g)).
inline Eigen::Vector3d error_vector(const RobotState& s, const GoalPose& goal) {
    return {s.x_p - goal.x_g, s.y_p - goal.y_g, wrap_angle(s.theta - goal.theta_g)};
}

inline double clf_value(const RobotState& s, const GoalPose& goal, const ClfParams& p) {
    const Eigen::Vector3d e = error_vector(s, goal);
    return e.dot(p.P() * e);
}

/// Gradient of V with respect to the state, 2 P e.
inline Eigen::Vector3d clf_gradient(const RobotState& s, const GoalPose& goal,
                                    const ClfParams& p) {
    return 2.0 * p.P() * error_vector(s, goal);
}

/// Affine CLF constraint coefficients: the row of the controller QP reads
/// coeff_u . u + rhs_offset <= delta, with coeff_u = L_g V and
/// rhs_offset = gamma V (L_f V = 0 since the drift vanishes).
struct ClfRow {
    Eigen::Vector2d coeff_u;
    double rhs_offset = 0.0;
};

inline ClfRow clf_constraint_row(const RobotState& s, const GoalPose& goal,
                                 const ClfParams& p) {
    const Eigen::Vector3d grad = clf_gradient(s, goal, p);
    ClfRow row;
    row.coeff_u = {grad[0] * std::cos(s.theta) + grad[1] * std::sin(s.theta), grad[2]};
    row.rhs_offset = p.gamma * clf_value(s, goal, p);
    return row;
}

}  // namespace safenav
