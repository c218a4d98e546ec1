#include "doctest.h"

#include "auvctl/tasks.hpp"

using namespace auvctl;

TEST_CASE("danger time accounting") {
    EpisodeMetrics m;
    for (int i = 0; i < 12000; ++i) update_metrics(m, 10.5, 100.0, 0.05, 0, 0);
    CHECK(m.dt == 0.0);
    EpisodeMetrics d;
    for (int i = 0; i < 688; ++i) update_metrics(d, 5.0, 100.0, 0.05, 0, 0);
    CHECK(d.dt == doctest::Approx(34.4));
    EpisodeMetrics edge;
    update_metrics(edge, kDangerClearance, 100.0, 0.05, 0, 0);
    CHECK(edge.dt == 0.0);
}

TEST_CASE("power draw") {
    CHECK(power_draw(0.0) == 40.0);
    CHECK(power_draw(1525.0) == 340.0);
    CHECK(power_draw(762.5) - 40.0 == doctest::Approx(300.0 / 8.0));
    double prev = 0.0;
    for (double n = 0.0; n <= 1525.0; n += 25.0) {
        CHECK(power_draw(n) >= prev);
        prev = power_draw(n);
    }
}

TEST_CASE("metric monotonicity and mean power") {
    EpisodeMetrics m;
    double prev_e = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int ssn = m.ssn;
        const double dt = m.dt;
        update_metrics(m, i % 3 == 0 ? 4.0 : 20.0, power_draw(10.0 * i), 0.05, i % 10 == 0, 0);
        CHECK(m.ssn >= ssn);
        CHECK(m.dt >= dt);
        CHECK(m.ec * m.duration >= prev_e);
        prev_e = m.ec * m.duration;
    }
}

TEST_CASE("reward components") {
    TickInfo idle;
    idle.rpm = 762.5;
    const RewardVector r = reward_components(TaskKind::DataCollection, idle);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 0.0);
    CHECK(r[3] == 0.0);
    CHECK(r[4] == doctest::Approx(-0.125));
    CHECK(r[5] == 0.0);

    TickInfo hit;
    hit.collisions = 1;
    CHECK(reward_components(TaskKind::DataCollection, hit)[2] == -1.0);

    TickInfo approach;
    approach.distance_before = 30.0;
    approach.distance_after = 29.9;
    CHECK(reward_components(TaskKind::DataCollection, approach)[0] == doctest::Approx(0.1));

    TickInfo shallow;
    shallow.clearance = 5.0;
    CHECK(reward_components(TaskKind::Waypoint, shallow)[3] == doctest::Approx(-0.75));
    shallow.clearance = -3.0;
    CHECK(reward_components(TaskKind::Waypoint, shallow)[3] == doctest::Approx(-1.0));

    TickInfo jerk;
    jerk.yaw_rate_cmd = 0.26;
    jerk.prev_yaw_rate_cmd = -0.26;
    CHECK(reward_components(TaskKind::TargetTracking, jerk)[5] == doctest::Approx(-2.0));
}

TEST_CASE("spawn is seeded and respects placement rules") {
    const Terrain terrain = Terrain::procedural(3);
    const ScenarioParams p = ScenarioParams::data_collection();
    const Scenario a = spawn(p, 17, terrain), b = spawn(p, 17, terrain), c = spawn(p, 18, terrain);
    REQUIRE(a.nodes.size() == 20u);
    CHECK(a.nodes == b.nodes);
    CHECK(a.nodes != c.nodes);
    ScenarioParams zero = p;
    zero.node_count = 0;
    CHECK_THROWS_AS(spawn(zero, 1, terrain), PlacementError);
}

TEST_CASE("sensor nodes sit at least 5 m above the seabed across 1000 seeds") {
    const Terrain terrain = Terrain::procedural(5);
    ScenarioParams p = ScenarioParams::data_collection();
    p.node_count = 5;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const Scenario s = spawn(p, seed, terrain);
        for (const Vec3& n : s.nodes) {
            CHECK(seabed_clearance(terrain, n) >= 5.0 - 1e-9);
            CHECK(terrain.contains(n.x(), n.y()));
            CHECK(n.z() >= 10.0);
        }
    }
}

TEST_CASE("tracking target stays in bounds and in the depth band") {
    const Terrain terrain = Terrain::procedural(6);
    const ScenarioParams p = ScenarioParams::target_tracking();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Scenario s = spawn(p, seed, terrain);
        CHECK(s.target_path.size() == 12001u);
        for (std::size_t i = 0; i < s.target_path.size(); ++i) {
            const Vec3& q = s.target_path[i];
            CHECK(terrain.contains(q.x(), q.y()));
            CHECK(q.z() >= p.depth_band_min - 1e-9);
            CHECK(q.z() <= p.depth_band_max + 1e-9);
            if (i > 0) CHECK((q - s.target_path[i - 1]).norm() <= 1.5 * kControlDt + 1e-9);
        }
    }
}

TEST_CASE("service dwell is strict") {
    const Terrain terrain = Terrain::flat(60.0);
    ScenarioParams p = ScenarioParams::data_collection();
    p.node_count = 1;
    const Scenario s = spawn(p, 2, terrain);
    TaskState state(s, terrain);
    const std::vector<Vec3> at{s.nodes[0]};
    int served = 0;
    for (int i = 0; i < 59; ++i) served += state.advance(at, 0.05)[0];
    CHECK(served == 0);
    served += state.advance(at, 0.05)[0];
    CHECK(served == 1);
    CHECK(state.all_served());
    CHECK(state.advance(at, 0.05)[0] == 0);
}

TEST_CASE("leaving the service radius resets the dwell timer") {
    const Terrain terrain = Terrain::flat(60.0);
    ScenarioParams p = ScenarioParams::data_collection();
    p.node_count = 1;
    const Scenario s = spawn(p, 4, terrain);
    TaskState state(s, terrain);
    const std::vector<Vec3> at{s.nodes[0]}, away{s.nodes[0] + Vec3(100.0, 0.0, 0.0)};
    for (int i = 0; i < 50; ++i) state.advance(at, 0.05);
    state.advance(away, 0.05);
    int served = 0;
    for (int i = 0; i < 50; ++i) served += state.advance(at, 0.05)[0];
    CHECK(served == 0);
}

TEST_CASE("task slot widths") {
    const Terrain terrain = Terrain::procedural(2);
    for (TaskKind k : {TaskKind::Waypoint, TaskKind::DataCollection, TaskKind::TargetTracking}) {
        ScenarioParams p;
        p.kind = k;
        const Scenario s = spawn(p, 3, terrain);
        TaskState st(s, terrain);
        CHECK(static_cast<int>(st.task_slots(0, s.starts, 0.0).size()) == task_width(k));
    }
    CHECK(task_kind_from_string("data-collection") == TaskKind::DataCollection);
    CHECK_THROWS_AS(task_kind_from_string("survey"), ConfigError);
}

TEST_CASE("collision detection") {
    const Terrain terrain = Terrain::flat(30.0);
    CHECK(in_collision(terrain, {}, Vec3(100, 100, 29.8), 0.5));
    CHECK_FALSE(in_collision(terrain, {}, Vec3(100, 100, 29.0), 0.5));
    const std::vector<SphereObstacle> obs{{Vec3(50, 50, 10), 2.0}};
    CHECK(in_collision(terrain, obs, Vec3(52.2, 50, 10), 0.5));
    CHECK_FALSE(in_collision(terrain, obs, Vec3(53.0, 50, 10), 0.5));
}
