#include "doctest.h"

#include "auvctl/dynamics.hpp"

#include <random>

using namespace auvctl;

namespace {

VehicleState run(const VehicleModel& m, VehicleState s, const ActuatorCommand& c, double seconds,
                 const Vec3& flow = Vec3::Zero()) {
    const int n = static_cast<int>(std::lround(seconds / kControlDt));
    for (int i = 0; i < n; ++i) s = m.step(s, c, flow, kControlDt);
    return s;
}

}  // namespace

TEST_CASE("rest is an equilibrium") {
    const VehicleModel m;
    const VehicleState s = run(m, VehicleState{}, ActuatorCommand{}, 5.0);
    CHECK(s.position.norm() < 1e-12);
    CHECK(s.nu.norm() < 1e-12);
    CHECK(s.time == doctest::Approx(5.0));
}

TEST_CASE("flow drags the vehicle downstream") {
    const VehicleModel m;
    const Vec6 f = m.generalized_force(VehicleState{}, ActuatorCommand{}, Vec3(1.0, 0.0, 0.0));
    CHECK(f(0) > 0.0);
    const VehicleState s = m.step(VehicleState{}, ActuatorCommand{}, Vec3(1.0, 0.0, 0.0), kControlDt);
    CHECK(s.nu(0) > 0.0);
}

TEST_CASE("calm water envelope") {
    const VehicleModel m;
    const ActuatorCommand full{0.0, 0.0, kMaxRpm};
    const VehicleState cruise = run(m, VehicleState{}, full, 60.0);
    CHECK(cruise.nu(0) == doctest::Approx(2.3).epsilon(0.05));

    ActuatorCommand turn = full;
    turn.rudder = m.params().delta_max;
    const VehicleState s = run(m, cruise, turn, 60.0);
    CHECK(std::abs(s.nu(5)) <= 0.26 * 1.1);
    CHECK(std::abs(s.nu(5)) > 0.2);
}

TEST_CASE("state invariants after steps") {
    const VehicleModel m;
    VehicleState s;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 400; ++i) {
        ActuatorCommand c{0.5 * u(rng), 0.5 * u(rng), 1525.0 * std::abs(u(rng))};
        s = m.step(s, c, Vec3(u(rng), u(rng), 0.0), kControlDt);
        CHECK(std::abs(s.attitude.norm() - 1.0) < 1e-9);
        CHECK(std::abs(s.pitch()) <= kPi / 2.0);
        CHECK(s.yaw() > -kPi);
        CHECK(s.yaw() <= kPi);
        CHECK(s.nu.allFinite());
    }
}

TEST_CASE("kinetic energy does not grow without actuation") {
    VehicleParams p = VehicleParams::remus100();
    p.r_bg = p.r_bb;
    const VehicleModel m(p);
    VehicleState s;
    s.nu << 1.5, 0.3, -0.2, 0.4, -0.3, 0.2;
    double e = m.kinetic_energy(s.nu);
    for (int i = 0; i < 600; ++i) {
        s = m.step(s, ActuatorCommand{}, Vec3::Zero(), kControlDt);
        const double e2 = m.kinetic_energy(s.nu);
        CHECK(e2 <= e + 1e-12);
        e = e2;
    }
}

TEST_CASE("trajectories are deterministic") {
    const VehicleModel m;
    const ActuatorCommand c{0.2, -0.05, 1200.0};
    const VehicleState a = run(m, VehicleState{}, c, 20.0, Vec3(0.3, -0.2, 0.0));
    const VehicleState b = run(m, VehicleState{}, c, 20.0, Vec3(0.3, -0.2, 0.0));
    CHECK(a.position == b.position);
    CHECK(a.nu == b.nu);
    CHECK(a.attitude.coeffs() == b.attitude.coeffs());
}

TEST_CASE("halving the substep barely moves a 60 s endpoint") {
    VehicleParams fine = VehicleParams::remus100();
    fine.substep = 0.005;
    const VehicleModel coarse_model, fine_model(fine);
    VehicleState cruise;
    cruise.nu(0) = 2.3;
    for (double rudder : {0.0, 0.0873, 0.5236}) {
        const ActuatorCommand c{rudder, 0.0, kMaxRpm};
        const Vec3 a = run(coarse_model, cruise, c, 60.0).position;
        const Vec3 b = run(fine_model, cruise, c, 60.0).position;
        CHECK((a - b).norm() < 0.01);
    }
}

TEST_CASE("saturate") {
    const VehicleParams& p = VehicleParams::remus100();
    ActuatorCommand prev{0.0, 0.0, 0.0};
    SUBCASE("magnitude clamp") {
        ActuatorCommand big{2.0 * p.delta_max, 0.0, 0.0};
        ActuatorCommand held{p.delta_max, 0.0, 0.0};
        const ActuatorCommand out = saturate(big, held, kControlDt, p);
        CHECK(out.rudder == p.delta_max);
        CHECK((out.saturation & kRudderSaturated) != 0);
    }
    SUBCASE("idempotent on valid commands") {
        ActuatorCommand c{0.1, -0.2, 900.0};
        const ActuatorCommand out = saturate(c, c, kControlDt, p);
        CHECK(out.rudder == c.rudder);
        CHECK(out.stern_plane == c.stern_plane);
        CHECK(out.propeller == c.propeller);
        CHECK(out.saturation == 0);
    }
    SUBCASE("propeller slew") {
        const ActuatorCommand out = saturate(ActuatorCommand{0.0, 0.0, 1525.0}, prev, 0.05, p);
        CHECK(out.propeller == doctest::Approx(25.0));
    }
}

TEST_CASE("frame transforms") {
    CHECK(body_to_world(Quat::Identity(), Vec3(1, 2, 3)) == Vec3(1, 2, 3));
    const Quat yaw90 = VehicleState::from_euler(Vec3::Zero(), 0.0, 0.0, kPi / 2.0).attitude;
    CHECK((body_to_world(yaw90, Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-12);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Quat q = Quat(n(rng), n(rng), n(rng), n(rng)).normalized();
        const Vec3 v(n(rng), n(rng), n(rng));
        CHECK(std::abs(body_to_world(q, v).norm() - v.norm()) < 1e-9);
        CHECK((world_to_body(q, body_to_world(q, v)) - v).norm() < 1e-9);
    }
    CHECK_THROWS_AS(body_to_world(Quat(2.0, 0.0, 0.0, 0.0), Vec3(1, 0, 0)), NonUnitQuaternion);
}

TEST_CASE("euler accessors round trip") {
    const VehicleState s = VehicleState::from_euler(Vec3::Zero(), 0.1, -0.4, 2.9);
    CHECK(s.roll() == doctest::Approx(0.1));
    CHECK(s.pitch() == doctest::Approx(-0.4));
    CHECK(s.yaw() == doctest::Approx(2.9));
}

TEST_CASE("parameter validation") {
    VehicleParams p = VehicleParams::remus100();
    p.mass = -1.0;
    CHECK_THROWS_AS(VehicleModel{p}, InvalidParams);
    const VehicleModel m;
    CHECK_THROWS_AS(m.step(VehicleState{}, ActuatorCommand{}, Vec3::Zero(), 0.0), DomainError);
    CHECK_THROWS_AS(m.step(VehicleState{}, ActuatorCommand{}, Vec3(NAN, 0, 0), 0.05), DomainError);
}
