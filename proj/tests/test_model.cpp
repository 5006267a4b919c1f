#include <doctest.h>

#include <cmath>
#include <random>

#include "safenav/model.hpp"

using namespace safenav;

namespace {

// Independent wrap oracle: a - 2*pi*round(a / 2*pi), pushed into (-pi, pi].
double wrap_oracle(double a) {
    double r = a - 2.0 * kPi * std::round(a / (2.0 * kPi));
    if (r <= -kPi) r += 2.0 * kPi;
    if (r > kPi) r -= 2.0 * kPi;
    return r;
}

}  // namespace

TEST_CASE("wrap_angle basics") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(wrap_angle(-3.5 * kPi) == doctest::Approx(wrap_oracle(-3.5 * kPi)).epsilon(1e-12));
    CHECK(wrap_angle(-3.5 * kPi) == doctest::Approx(0.5 * kPi).epsilon(1e-12));
    CHECK(wrap_angle(kPi) == kPi);
    CHECK(wrap_angle(-kPi) == kPi);
    CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
    CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("wrap_angle range and congruence on random angles") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-60.0, 60.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = dist(rng);
        const double w = wrap_angle(a);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        // same point on the circle
        CHECK(std::cos(w) == doctest::Approx(std::cos(a)).epsilon(1e-9));
        CHECK(std::sin(w) == doctest::Approx(std::sin(a)).epsilon(1e-9));
    }
}

TEST_CASE("center_position") {
    const Pose2 c1 = center_position(RobotState(0, 0, 0), 0.15);
    CHECK(c1.x == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(c1.y == 0.0);

    const Pose2 c2 = center_position(RobotState(1, 2, kPi / 2), 0.15);
    CHECK(c2.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c2.y == doctest::Approx(2.15).epsilon(1e-12));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> th(-kPi, kPi);
    for (int i = 0; i < 100; ++i) {
        const RobotState s(0, 0, th(rng));
        const Pose2 c = center_position(s, 0.15);
        CHECK(std::hypot(c.x, c.y) == doctest::Approx(0.15).epsilon(1e-14));
    }
}

TEST_CASE("step_euler pure translation and rotation") {
    const RobotState s1 = step_euler(RobotState(0, 0, 0), {1.0, 0.0}, 0.1);
    CHECK(s1.x_p == doctest::Approx(0.1));
    CHECK(s1.y_p == 0.0);
    CHECK(s1.theta == 0.0);

    const RobotState s2 = step_euler(RobotState(0, 0, 0), {0.0, 1.0}, 0.1);
    CHECK(s2.x_p == 0.0);
    CHECK(s2.y_p == 0.0);
    CHECK(s2.theta == doctest::Approx(0.1));

    CHECK_THROWS_AS(step_euler(RobotState(), {1, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("step_euler matches the closed-form unicycle arc") {
    // Constant u = (1, 1) from the origin: x = sin t, y = 1 - cos t, theta = t.
    auto arc_error = [](double dt, int n) {
        RobotState s(0, 0, 0);
        for (int i = 0; i < n; ++i) s = step_euler(s, {1.0, 1.0}, dt);
        const double t = dt * n;
        return std::max({std::abs(s.x_p - std::sin(t)),
                         std::abs(s.y_p - (1.0 - std::cos(t))),
                         std::abs(s.theta - t)});
    };
    CHECK(arc_error(1e-4, 1000) < 1e-3);

    // Euler error shrinks linearly in dt.
    const double e1 = arc_error(1e-2, 10);
    const double e2 = arc_error(5e-3, 20);
    CHECK(e2 < 0.6 * e1);
}

TEST_CASE("affine decomposition") {
    const AffineDecomposition d0 = affine_decomposition(RobotState(0, 0, 0));
    CHECK(d0.f.isZero(0.0));
    CHECK(d0.g(0, 0) == 1.0);
    CHECK(d0.g(1, 0) == 0.0);
    CHECK(d0.g(2, 1) == 1.0);

    const AffineDecomposition d1 = affine_decomposition(RobotState(0, 0, kPi / 2));
    CHECK(d1.g(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d1.g(1, 0) == doctest::Approx(1.0).epsilon(1e-12));

    // f + g u reproduces the unicycle vector field exactly.
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const RobotState s(dist(rng), dist(rng), dist(rng));
        const Eigen::Vector2d u(dist(rng), dist(rng));
        const AffineDecomposition d = affine_decomposition(s);
        const Eigen::Vector3d xdot = d.f + d.g * u;
        CHECK(xdot[0] == std::cos(s.theta) * u[0]);
        CHECK(xdot[1] == std::sin(s.theta) * u[0]);
        CHECK(xdot[2] == u[1]);
    }
}

TEST_CASE("theta stays wrapped through stepping") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    RobotState s(0, 0, 3.0);
    for (int i = 0; i < 500; ++i) {
        s = step_euler(s, {dist(rng), dist(rng)}, 0.1);
        CHECK(s.theta > -kPi);
        CHECK(s.theta <= kPi);
    }
}

TEST_CASE("RobotParams validation") {
    RobotParams ok;
    CHECK_NOTHROW(ok.validate());
    RobotParams bad = ok;
    bad.l = 0.3;  // offset point outside the body
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.r_r = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.v_max = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
