#include "doctest.h"

#include "auvctl/control.hpp"

#include <random>

using namespace auvctl;

TEST_CASE("s-surface law values") {
    SSurfaceParams p{1.0, 1.0, 0.0, 1.0};
    CHECK(s_surface_update(p, 0.0, 0.0, 0.0) == 0.0);
    // Direct evaluation of the sigmoid form.
    const double oracle = 2.0 / (1.0 + std::exp(-10.0)) - 1.0;
    CHECK(std::abs(s_surface_update(p, 10.0, 0.0, 0.0) - oracle) < 1e-12);
    CHECK(std::abs(s_surface_update(p, 10.0, 0.0, 0.0) - 0.99991) < 1e-5);
    CHECK(s_surface_update(p, 0.0, 0.0, 0.25) == 0.25);
}

TEST_CASE("s-surface symmetry, bounds and monotonicity") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-20.0, 20.0), z(0.05, 10.0);
    for (int i = 0; i < 2000; ++i) {
        SSurfaceParams p{z(rng), z(rng), 0.0, 1.0};
        const double e = u(rng), de = u(rng);
        const double v = s_surface_update(p, e, de, 0.0);
        CHECK(s_surface_update(p, -e, -de, 0.0) == -v);
        CHECK(v > -1.0 - 1e-15);
        CHECK(v < 1.0 + 1e-15);
        const double d = 1e-3;
        if (std::abs(p.zeta1 * e + p.zeta2 * de) < 20.0) {
            CHECK(s_surface_update(p, e + d, de, 0.0) > v);
            CHECK(s_surface_update(p, e, de + d, 0.0) > v);
        }
    }
    CHECK_THROWS_AS(SSurfaceParams({0.0, 1.0, 0.0, 1.0}).validate(), InvalidParams);
}

TEST_CASE("pid behaviour") {
    SUBCASE("proportional only") {
        Pid pid(PidParams{1.0, 0.0, 0.0, 0.5, 1.0, 0.0});
        CHECK(pid.update(0.5, 0.05) == 0.5);
    }
    SUBCASE("integral clamp") {
        Pid pid(PidParams{0.0, 2.0, 0.0, 0.3, 1.0, 0.0});
        double prev = 0.0;
        for (int i = 0; i < 400; ++i) {
            const double out = pid.update(1.0, 0.05);
            CHECK(out >= prev);
            CHECK(std::abs(pid.integral_term()) <= 0.3 + 1e-15);
            prev = out;
        }
        CHECK(prev == doctest::Approx(0.3));
    }
    SUBCASE("unfiltered derivative") {
        Pid pid(PidParams{0.0, 0.0, 1.0, 0.5, 1.0, 0.0});
        pid.update(0.0, 0.05);
        CHECK(pid.update(1.0, 0.05) == doctest::Approx(20.0));
    }
}

TEST_CASE("sliding mode yaw controller") {
    SmcParams p;
    SUBCASE("equilibrium on the surface") {
        const VehicleState s = VehicleState::from_euler(Vec3::Zero(), 0.0, 0.0, 0.7);
        CHECK(smc_update(p, 0.7, s, 0.05) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("reference model step response is monotone for damping >= 1") {
        for (double damping : {1.0, 1.5}) {
            ReferenceModel m(1.2, damping, 10.0);
            m.reset(0.0);
            double prev = 0.0;
            for (int i = 0; i < 400; ++i) {
                m.update(1.0, 0.05);
                CHECK(m.value() >= prev);
                CHECK(m.value() <= 1.0);
                prev = m.value();
            }
            CHECK(prev == doctest::Approx(1.0).epsilon(1e-3));
        }
    }
    SUBCASE("switching term saturates outside the boundary layer") {
        SmcYaw c(p);
        c.reset(0.0);
        c.update(0.0, 0.5, 0.0, 0.05);
        CHECK(std::abs(c.sliding_variable()) >= p.boundary_layer);
        CHECK(c.switching_term() == doctest::Approx(p.switching_gain * (c.sliding_variable() > 0 ? 1 : -1)));
    }
}

TEST_CASE("heading reference integration and wrap") {
    ControllerBank bank(ControllerConfig{});
    VehicleState s;
    bank.reset(s);
    for (int i = 0; i < 200; ++i) bank.update(Action{0.0, 0.26, 1000.0}, s, Vec3::Zero(), 0.05);
    CHECK(bank.heading_reference() == doctest::Approx(2.6));

    bank.reset(VehicleState::from_euler(Vec3::Zero(), 0.0, 0.0, -kPi + 0.1));
    bank.set_heading_reference(kPi - 0.1);
    bank.update(Action{0.0, 0.0, 1000.0}, VehicleState::from_euler(Vec3::Zero(), 0.0, 0.0, -kPi + 0.1),
                Vec3::Zero(), 0.05);
    CHECK(bank.yaw_error() == doctest::Approx(-0.2));
}

TEST_CASE("zero-error channels give near-zero fins for every controller kind") {
    for (ControllerKind k : {ControllerKind::SSurface, ControllerKind::PID, ControllerKind::PVS}) {
        ControllerConfig cfg;
        cfg.kind = k;
        ControllerBank bank(cfg);
        VehicleState s = VehicleState::from_euler(Vec3(0, 0, 10), 0.0, 0.05, 1.0);
        s.nu(0) = 1.5;
        bank.reset(s);
        ActuatorCommand prev{};
        for (int i = 0; i < 10; ++i) {
            const ActuatorCommand c = bank.update(Action{0.05, 0.0, 900.0}, s, Vec3::Zero(), 0.05);
            CHECK(std::abs(c.rudder) < 1e-9);
            CHECK(std::abs(c.stern_plane) < 1e-9);
            CHECK(std::abs(c.propeller - prev.propeller) <= 25.0 + 1e-9);
            prev = c;
        }
    }
}

TEST_CASE("bank commands stay inside actuator limits") {
    const VehicleParams& vp = VehicleParams::remus100();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (ControllerKind k : {ControllerKind::SSurface, ControllerKind::PID, ControllerKind::PVS}) {
        ControllerConfig cfg;
        cfg.kind = k;
        cfg.yaw_ss.delta_u_gain = 2.0;
        ControllerBank bank(cfg);
        bank.reset(VehicleState{});
        for (int i = 0; i < 500; ++i) {
            const VehicleState s = VehicleState::from_euler(Vec3::Zero(), 0.3 * u(rng), 0.5 * u(rng), 3.0 * u(rng));
            const ActuatorCommand c =
                bank.update(Action{0.35 * u(rng), 0.26 * u(rng), 1525.0 * std::abs(u(rng))}, s,
                            Vec3(3.0 * u(rng), 3.0 * u(rng), 0.0), 0.05);
            CHECK(std::abs(c.rudder) <= vp.delta_max);
            CHECK(std::abs(c.stern_plane) <= vp.delta_max);
            CHECK(c.propeller >= 0.0);
            CHECK(c.propeller <= vp.rpm_max);
        }
    }
}

TEST_CASE("controller kind names") {
    CHECK(controller_kind_from_string("S-Surface") == ControllerKind::SSurface);
    CHECK(controller_kind_from_string("pid") == ControllerKind::PID);
    CHECK(controller_kind_from_string("PVS") == ControllerKind::PVS);
    CHECK(to_string(ControllerKind::PVS) == "pvs");
    CHECK_THROWS_AS(controller_kind_from_string("mpc"), ConfigError);
}
