#include "doctest.h"

#include "auvctl/rl/train.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

using namespace auvctl;
using namespace auvctl::rl;

namespace {

EnvConfig flat_waypoint(ControlMode mode) {
    EnvConfig c;
    c.scenario = ScenarioParams::waypoint();
    c.scenario.duration = 10.0;
    c.mode = mode;
    c.terrain.kind = TerrainKind::Flat;
    c.terrain.flat_depth = 60.0;
    c.sensors = SensorNoiseConfig::noiseless();
    return c;
}

TrainConfig tiny_train(std::uint64_t seed) {
    TrainConfig t;
    t.td3.hidden = 8;
    t.td3.batch_size = 16;
    t.td3.replay_capacity = 5000;
    t.td3.warmup_steps = 100;
    t.total_steps = 900;
    t.seed = seed;
    return t;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("auvctl_" + name)).string();
}

}  // namespace

TEST_CASE("action scaling maps the zero action to mid rpm and respects bounds") {
    ActionScaling s;
    const Action a = s.scale(Vector::Zero(3));
    CHECK(a.pitch == 0.0);
    CHECK(a.yaw_rate == 0.0);
    CHECK(a.rpm == 762.5);
    Vector big(3);
    big << 5.0, -7.0, 9.0;
    const Action b = s.scale(big);
    CHECK(b.pitch == 0.35);
    CHECK(b.yaw_rate == -0.26);
    CHECK(b.rpm == 1525.0);
    CHECK(s.normalize(b) == Vector(Vector::Constant(3, 1.0)).cwiseProduct(Eigen::Vector3d(1, -1, 1)));
    CHECK_THROWS_AS(s.scale(Vector::Zero(2)), WidthMismatch);
}

TEST_CASE("zero policy in calm water holds a near-straight course at mid rpm") {
    EnvConfig c = flat_waypoint(ControlMode::Controlled);
    c.scenario.duration = 60.0;
    c.scenario.waypoint_radius = 0.1;
    c.record_trace = true;
    Environment env(c);
    const EpisodeResult r = rollout(env, zero_policy(), 3);
    const auto& tr = r.trace;
    REQUIRE(tr.size() > 1000);
    const double psi0 = env.scenario().starts.front().yaw();
    for (const auto& rec : tr) {
        CHECK(rec.action.rpm == 762.5);
        CHECK(std::abs(wrap_angle(rec.state.yaw() - psi0)) < 0.02);
    }
    const Vec3 d = tr.back().state.position - env.scenario().starts.front().position;
    const double along = d.head<2>().dot(Vec2(std::cos(psi0), std::sin(psi0)));
    CHECK(along > 40.0);
    CHECK(std::abs(d.head<2>().norm() - along) < 0.5);
}

TEST_CASE("ideal mode displacement per tick is bounded by top speed") {
    EnvConfig c = flat_waypoint(ControlMode::Ideal);
    c.record_trace = true;
    Environment env(c);
    for (auto pol : {guidance_policy(), random_policy(4)}) {
        const EpisodeResult r = rollout(env, pol, 11);
        Vec3 prev = env.scenario().starts.front().position;
        for (const auto& rec : r.trace) {
            CHECK((rec.state.position - prev).norm() <= kMaxSpeed * kControlDt + 1e-12);
            CHECK(std::abs(rec.action.pitch) <= 0.35);
            CHECK(std::abs(rec.action.yaw_rate) <= 0.26);
            CHECK(rec.action.rpm >= 0.0);
            CHECK(rec.action.rpm <= 1525.0);
            prev = rec.state.position;
        }
    }
}

TEST_CASE("equal seeds give identical traces") {
    EnvConfig c = flat_waypoint(ControlMode::Controlled);
    c.sensors = SensorNoiseConfig{};
    c.terrain.kind = TerrainKind::Procedural;
    c.record_trace = true;
    Environment a(c), b(c);
    const EpisodeResult ra = rollout(a, guidance_policy(), 21), rb = rollout(b, guidance_policy(), 21);
    REQUIRE(ra.trace.size() == rb.trace.size());
    std::ostringstream sa, sb;
    for (const auto& r : ra.trace) write_trace_row(sa, r);
    for (const auto& r : rb.trace) write_trace_row(sb, r);
    CHECK(sa.str() == sb.str());
    CHECK(ra.episode_return == rb.episode_return);
    const EpisodeResult rc = rollout(a, guidance_policy(), 22);
    CHECK(rc.episode_return != ra.episode_return);
}

TEST_CASE("observation width matches the declared layout") {
    for (auto k : {TaskKind::Waypoint, TaskKind::DataCollection, TaskKind::TargetTracking}) {
        EnvConfig c;
        c.scenario = k == TaskKind::Waypoint ? ScenarioParams::waypoint()
                     : k == TaskKind::DataCollection ? ScenarioParams::data_collection()
                                                     : ScenarioParams::target_tracking();
        c.mode = ControlMode::Ideal;
        Environment env(c);
        const auto obs = env.reset(5);
        REQUIRE(obs.size() == 1);
        CHECK(obs[0].width() == env.obs_width());
        CHECK(env.obs_width() == 23 + task_width(k));
    }
}

TEST_CASE("collisions end training episodes and are counted in evaluation") {
    EnvConfig c = flat_waypoint(ControlMode::Ideal);
    c.terrain.flat_depth = 20.0;
    c.scenario.start_depth = 4.0;
    c.scenario.depth_band_min = 2.0;
    c.scenario.depth_band_max = 5.0;
    c.scenario.duration = 30.0;
    const Policy dive = [](const Observation&) {
        Vector a(3);
        a << -1.0, 0.0, 1.0;
        return a;
    };
    c.terminate_on_collision = false;
    Environment eval(c);
    const EpisodeResult r = rollout(eval, dive, 2);
    CHECK(r.metrics.collisions == 1);
    CHECK(r.steps == 600);
    CHECK(r.component_sums[2] == -1.0);
    CHECK(eval.states().front().position.z() < 20.0);

    c.terminate_on_collision = true;
    Environment train(c);
    const EpisodeResult t = rollout(train, dive, 2);
    CHECK(t.terminal);
    CHECK(t.steps < 600);
}

TEST_CASE("multiple vehicles share one task and get their own observations") {
    EnvConfig c;
    c.mode = ControlMode::Ideal;
    c.scenario.auv_count = 3;
    c.scenario.duration = 20.0;
    Environment env(c);
    const auto obs = env.reset(8);
    CHECK(obs.size() == 3);
    CHECK_FALSE(obs[0].values.isApprox(obs[1].values));
    const EpisodeResult r = rollout(env, guidance_policy(), 8);
    CHECK(env.vehicle_metrics().size() == 3);
    int ssn = 0;
    for (const auto& m : env.vehicle_metrics()) ssn += m.ssn;
    CHECK(r.metrics.ssn == ssn);
    CHECK(r.metrics.ssn == env.task().served_count());
}

TEST_CASE("stepping an ended episode or with the wrong action count fails") {
    EnvConfig c = flat_waypoint(ControlMode::Ideal);
    c.scenario.duration = 0.1;
    Environment env(c);
    env.reset(1);
    CHECK_THROWS_AS(env.step({}), LengthMismatch);
    env.step({Vector::Zero(3)});
    env.step({Vector::Zero(3)});
    CHECK_THROWS_AS(env.step({Vector::Zero(3)}), DomainError);
}

TEST_CASE("training is deterministic and its buffer re-scores exactly") {
    const EnvConfig c = flat_waypoint(ControlMode::Ideal);
    Trainer a(c, tiny_train(5)), b(c, tiny_train(5));
    a.run();
    b.run();
    std::ostringstream la, lb;
    write_train_log(la, a.log());
    write_train_log(lb, b.log());
    CHECK(la.str() == lb.str());
    CHECK(a.agent().actor().flat_parameters() == b.agent().actor().flat_parameters());

    const ReplayBuffer& buf = a.replay();
    for (std::size_t i = 0; i < buf.size(); ++i)
        CHECK(std::abs(compute_reward(buf.components(i), c.weights) - buf.reward(i)) <= 1e-12);
}

TEST_CASE("interrupted training resumes to identical artifacts") {
    const EnvConfig c = flat_waypoint(ControlMode::Ideal);
    Trainer whole(c, tiny_train(6));
    whole.run();

    const std::string ck = temp_path("resume.ckpt");
    TrainConfig part = tiny_train(6);
    part.stop_after = 350;
    part.checkpoint_path = ck;
    Trainer first(c, part);
    CHECK_FALSE(first.run());
    CHECK(first.steps() < part.total_steps);

    Trainer resumed = Trainer::load_checkpoint(ck, c);
    resumed.mutable_config().stop_after = 0;
    CHECK(resumed.run());
    std::ostringstream lw, lr;
    write_train_log(lw, whole.log());
    write_train_log(lr, resumed.log());
    CHECK(lw.str() == lr.str());
    CHECK(resumed.agent().actor().flat_parameters() == whole.agent().actor().flat_parameters());
    CHECK(resumed.agent().critic2().flat_parameters() == whole.agent().critic2().flat_parameters());
    CHECK(resumed.best_policy().actor.flat_parameters() == whole.best_policy().actor.flat_parameters());
    std::filesystem::remove(ck);
}

TEST_CASE("zero reward weights give zero returns and finite networks") {
    EnvConfig c = flat_waypoint(ControlMode::Ideal);
    c.weights = RewardWeights::zeros();
    Trainer t(c, tiny_train(7));
    t.run();
    for (const auto& row : t.log()) CHECK(row.episode_return == 0.0);
    CHECK(t.agent().actor().all_finite());
    CHECK(t.agent().critic1().all_finite());
}

TEST_CASE("reweighting the trainer re-scores stored transitions") {
    const EnvConfig c = flat_waypoint(ControlMode::Ideal);
    Trainer t(c, tiny_train(8));
    t.run();
    RewardWeights w = c.weights;
    w.set("progress", 3.0);
    t.set_weights(w);
    for (std::size_t i = 0; i < t.replay().size(); ++i)
        CHECK(t.replay().reward(i) == compute_reward(t.replay().components(i), w));
    CHECK(t.env().config().weights.get("progress") == 3.0);
}

TEST_CASE("policy bundle round trip and missing file") {
    const EnvConfig c = flat_waypoint(ControlMode::Ideal);
    Trainer t(c, tiny_train(9));
    const PolicyBundle b = t.current_policy();
    const std::string path = temp_path("policy.bin");
    b.save(path);
    const PolicyBundle back = PolicyBundle::load(path);
    CHECK(back.actor.flat_parameters() == b.actor.flat_parameters());
    CHECK(back.task == TaskKind::Waypoint);
    CHECK(back.mode == ControlMode::Ideal);
    CHECK(back.scaling.rpm_max == 1525.0);
    std::filesystem::remove(path);
    try {
        PolicyBundle::load(path);
        FAIL("expected an error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
}

TEST_CASE("parallel evaluation matches sequential evaluation") {
    EnvConfig c = flat_waypoint(ControlMode::Ideal);
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    const EvalSummary a = evaluate(c, guidance_policy(), seeds, 1), b = evaluate(c, guidance_policy(), seeds, 3);
    CHECK(a.mean_return == b.mean_return);
    CHECK(a.std_return == b.std_return);
    for (std::size_t k = 0; k < seeds.size(); ++k) CHECK(a.episodes[k].episode_return == b.episodes[k].episode_return);
}
