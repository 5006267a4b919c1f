#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "safenav/scenario_io.hpp"

using namespace safenav;

namespace {

std::string read_bundled(const char* name) {
    const std::string path = std::string(SAFENAV_SCENARIO_DIR) + "/" + name;
    std::ifstream f(path);
    REQUIRE(f.good());
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

Scenario sample_scenario() {
    Scenario sc;
    sc.start = RobotState(0.25, -1.5, 0.75);
    sc.goal = GoalPose(4.0, 3.0, -0.5);
    sc.controller.clf.a1 = 1.25;
    sc.controller.clf.b2 = 0.375;
    sc.controller.cbf.mode = CbfMode::CenterPoint;
    sc.controller.H << 1.5, 0.25, 0.25, 2.0;
    Obstacle o1;
    o1.start = {1.0, 0.5};
    o1.end = {1.0, 0.5};
    o1.speed = 0.0;
    o1.radius = 0.4;
    Obstacle o2;
    o2.start = {3.0, 3.0};
    o2.end = {0.5, 2.5};
    o2.speed = 0.625;
    o2.radius = 0.55;
    sc.obstacles = {o1, o2};
    sc.dt = 0.05;
    sc.t_max = 12.5;
    return sc;
}

}  // namespace

TEST_CASE("bundled scenarios parse with the documented values") {
    const Scenario st = parse_scenario(read_bundled("static_two_obstacles.json"));
    CHECK(st.robot.r_r == 0.25);
    CHECK(st.robot.l == 0.15);
    CHECK(st.robot.v_max == 2.0);
    CHECK(st.robot.w_max == 1.5);
    CHECK(st.goal.x_g == 5.0);
    CHECK(st.goal.y_g == 4.0);
    CHECK(st.controller.p_relax == 1000.0);
    CHECK(st.controller.clf.gamma == 0.5);
    CHECK(st.controller.cbf.alpha == 1.5);
    CHECK(st.controller.cbf.mode == CbfMode::OffsetPoint);
    REQUIRE(st.obstacles.size() == 2);
    CHECK(st.obstacles[0].speed == 0.0);
    CHECK(st.dt == 0.1);
    CHECK(st.t_max == 30.0);

    const Scenario dy = parse_scenario(read_bundled("dynamic_two_obstacles.json"));
    CHECK(dy.goal.y_g == 4.2);
    REQUIRE(dy.obstacles.size() == 2);
    CHECK(dy.obstacles[0].start.x == 3.5);
    CHECK(dy.obstacles[0].end.x == 0.3);
    CHECK(dy.obstacles[0].speed == 0.5);
    CHECK(dy.obstacles[1].start.x == 5.0);
    CHECK(dy.obstacles[1].start.y == 3.0);
}

TEST_CASE("serialize then parse is the identity") {
    const Scenario sc = sample_scenario();
    const Scenario rt = parse_scenario(serialize_scenario(sc));
    CHECK(rt.start.x_p == sc.start.x_p);
    CHECK(rt.start.y_p == sc.start.y_p);
    CHECK(rt.start.theta == sc.start.theta);
    CHECK(rt.goal.x_g == sc.goal.x_g);
    CHECK(rt.goal.theta_g == sc.goal.theta_g);
    CHECK(rt.robot.r_r == sc.robot.r_r);
    CHECK(rt.controller.clf.a1 == sc.controller.clf.a1);
    CHECK(rt.controller.clf.b2 == sc.controller.clf.b2);
    CHECK(rt.controller.clf.gamma == sc.controller.clf.gamma);
    CHECK(rt.controller.cbf.alpha == sc.controller.cbf.alpha);
    CHECK(rt.controller.cbf.mode == sc.controller.cbf.mode);
    CHECK(rt.controller.H == sc.controller.H);
    CHECK(rt.controller.Q == sc.controller.Q);
    CHECK(rt.controller.p_relax == sc.controller.p_relax);
    REQUIRE(rt.obstacles.size() == sc.obstacles.size());
    for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
        CHECK(rt.obstacles[i].start.x == sc.obstacles[i].start.x);
        CHECK(rt.obstacles[i].end.y == sc.obstacles[i].end.y);
        CHECK(rt.obstacles[i].speed == sc.obstacles[i].speed);
        CHECK(rt.obstacles[i].radius == sc.obstacles[i].radius);
    }
    CHECK(rt.dt == sc.dt);
    CHECK(rt.t_max == sc.t_max);
    CHECK(rt.goal_pos_tol == sc.goal_pos_tol);
    CHECK(rt.goal_ang_tol == sc.goal_ang_tol);
}

TEST_CASE("strict parsing") {
    const std::string good = serialize_scenario(sample_scenario());

    CHECK_THROWS_AS(parse_scenario("not json at all"), ScenarioParseError);
    CHECK_THROWS_AS(parse_scenario("{}"), ScenarioParseError);

    // unknown key
    {
        nlohmann::json j = nlohmann::json::parse(good);
        j["extra"] = 1;
        CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioParseError);
        j = nlohmann::json::parse(good);
        j["robot"]["color"] = "red";
        CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioParseError);
    }
    // missing key
    {
        nlohmann::json j = nlohmann::json::parse(good);
        j["sim"].erase("dt");
        CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioParseError);
    }
    // bad mode string
    {
        nlohmann::json j = nlohmann::json::parse(good);
        j["controller"]["mode"] = "sideways";
        CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioParseError);
    }
    // scenario invariants re-validated after parse
    {
        nlohmann::json j = nlohmann::json::parse(good);
        j["sim"]["dt"] = 0.0;
        CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioParseError);
        j = nlohmann::json::parse(good);
        j["controller"]["P"]["a1"] = -1.0;
        CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioParseError);
        j = nlohmann::json::parse(good);
        j["robot"]["l"] = 0.4;  // offset point outside the body
        CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioParseError);
    }
}

TEST_CASE("trajectory csv reproduces the run bit-exactly") {
    Scenario sc = parse_scenario(read_bundled("static_two_obstacles.json"));
    sc.t_max = 2.0;  // short run is enough
    const SimResult r = run(sc);
    const std::string csv = trajectory_csv(r, sc.obstacles.size());

    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "t,x_p,y_p,theta,x_c,y_c,v,omega,delta,V,h_0,h_1,solve_time");

    std::size_t row = 0;
    std::string line;
    while (std::getline(lines, line)) {
        REQUIRE(row < r.trajectory.size());
        const TrajectoryRecord& rec = r.trajectory[row];
        std::vector<double> vals;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            vals.push_back(std::strtod(cell.c_str(), nullptr));
        }
        REQUIRE(vals.size() == 13);
        CHECK(vals[0] == rec.t);
        CHECK(vals[1] == rec.state.x_p);
        CHECK(vals[2] == rec.state.y_p);
        CHECK(vals[3] == rec.state.theta);
        CHECK(vals[4] == rec.center.x);
        CHECK(vals[5] == rec.center.y);
        CHECK(vals[6] == rec.u.v);
        CHECK(vals[7] == rec.u.omega);
        CHECK(vals[8] == rec.delta);
        CHECK(vals[9] == rec.V);
        CHECK(vals[10] == rec.h[0]);
        CHECK(vals[11] == rec.h[1]);
        CHECK(vals[12] == rec.solve_time);
        ++row;
    }
    CHECK(row == r.trajectory.size());
    CHECK(static_cast<int>(row) == r.steps + 1);
}

TEST_CASE("summary document") {
    Scenario sc = parse_scenario(read_bundled("static_two_obstacles.json"));
    sc.t_max = 1.0;
    const SimResult r = run(sc);
    const nlohmann::json j = summary_json(sc, r);
    CHECK(j["outcome"] == "Timeout");
    CHECK(j["time_to_goal"].is_null());
    CHECK(j["min_h"].get<double>() == *r.metrics.min_h);
    CHECK(j["steps"].get<int>() == r.steps);
    CHECK(j["mean_solve_time"].get<double>() == r.metrics.mean_solve_time);
    CHECK(j["config"] == scenario_to_json(sc));
}

TEST_CASE("atomic file writing") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "safenav_io_test";
    fs::create_directories(dir);
    const fs::path target = dir / "out.txt";
    write_file_atomic(target, "hello\n");
    std::ifstream f(target);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(content == "hello\n");
    CHECK_FALSE(fs::exists(target.string() + ".tmp"));
    fs::remove_all(dir);
}
