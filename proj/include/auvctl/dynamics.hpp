#pragma once

#include "auvctl/core.hpp"

#include <cstdint>

namespace auvctl {

/// Pose and body velocities of one vehicle. Position is NED (z positive down),
/// attitude rotates body vectors into the world frame.
struct VehicleState {
    Vec3 position = Vec3::Zero();
    Quat attitude = Quat::Identity();
    Vec6 nu = Vec6::Zero();  // [u v w p q r]
    double time = 0.0;

    double roll() const;
    double pitch() const;  // in [-pi/2, pi/2]
    double yaw() const;    // in (-pi, pi]
    Vec3 linear_velocity() const { return nu.head<3>(); }
    Vec3 angular_velocity() const { return nu.tail<3>(); }
    double depth() const { return position.z(); }

    static VehicleState from_euler(const Vec3& position, double roll, double pitch, double yaw);
};

enum SaturationBits : std::uint8_t {
    kRudderSaturated = 1u << 0,
    kSternSaturated = 1u << 1,
    kPropellerSaturated = 1u << 2,
};

struct ActuatorCommand {
    double rudder = 0.0;       // rad
    double stern_plane = 0.0;  // rad
    double propeller = 0.0;    // rpm
    std::uint8_t saturation = 0;
};

struct VehicleParams {
    double mass = 31.9;
    double length = 1.6;
    double diameter = 0.19;
    double rho = 1026.0;
    double gravity = kGravity;
    Vec3 r_bg{0.0, 0.0, 0.02};  // centre of gravity w.r.t. the body origin
    Vec3 r_bb{0.0, 0.0, 0.0};   // centre of buoyancy
    double buoyancy = 0.0;      // N; <= 0 means neutral (equal to weight)
    Vec3 inertia = Vec3::Zero();     // Ix Iy Iz about the CG
    Vec6 added_mass = Vec6::Zero();  // diagonal added-mass coefficients
    Vec6 linear_damping = Vec6::Zero();
    double linear_damping_fade = 3.0;  // surge/sway linear damping *= exp(-fade * U_r)

    double drag_coefficient = 0.42;  // surge parasitic drag, frontal area basis
    double lift_area = 0.0;          // hull planform reference area
    double crossflow_cd = 1.53;
    int crossflow_strips = 20;

    double rudder_lift = 0.5;
    double rudder_area = 0.01;
    double rudder_x = -0.8;
    double stern_lift = 0.7;
    double stern_area = 0.01;
    double stern_x = -0.8;
    double fin_stall = 0.7;  // rad, effective angle of attack clamp

    double prop_diameter = 0.14;
    double thrust_deduction = 0.1;
    double wake_fraction = 0.944;  // advance speed = wake_fraction * U
    double kt0 = 0.4566, kt_max = 0.1798, kq0 = 0.07, kq_max = 0.0312, ja_max = 0.6632;

    double delta_max = 30.0 * kPi / 180.0;
    double fin_slew = 60.0 * kPi / 180.0;  // rad/s
    double rpm_max = kMaxRpm;
    double rpm_slew = 500.0;  // rpm/s
    double substep = 0.01;    // s

    double weight() const { return mass * gravity; }
    double buoyancy_force() const { return buoyancy > 0.0 ? buoyancy : weight(); }
    Mat6 rigid_body_mass() const;
    Mat6 mass_matrix() const;

    /// REMUS-100-class defaults with surge drag and yaw damping calibrated to the
    /// 2.3 m/s / 0.26 rad/s envelope. Computed once and cached.
    static const VehicleParams& remus100();
    /// Uncalibrated geometry-derived defaults (added mass, inertia, damping).
    static VehicleParams remus100_uncalibrated();
};

/// Adjusts drag_coefficient so straight-line speed at rpm_max is `top_speed`, and
/// the yaw linear damping so the steady turn rate at full rudder is `yaw_rate`.
VehicleParams calibrate_envelope(VehicleParams p, double top_speed, double yaw_rate);

/// Magnitude clamp, then slew clamp against `prev`. Sets saturation bits for
/// channels that were clipped by the magnitude limit.
ActuatorCommand saturate(const ActuatorCommand& raw, const ActuatorCommand& prev, double dt,
                         const VehicleParams& p);

Vec3 body_to_world(const Quat& attitude, const Vec3& v_body);
Vec3 world_to_body(const Quat& attitude, const Vec3& v_world);

/// Rigid-body model; validates parameters at construction and is immutable.
class VehicleModel {
public:
    explicit VehicleModel(VehicleParams params = VehicleParams::remus100());

    const VehicleParams& params() const { return p_; }
    const Mat6& mass_matrix() const { return m_; }

    /// Advances `state` by dt with the command held and the ambient flow
    /// (NED, m/s) entering through the relative velocity.
    VehicleState step(const VehicleState& state, const ActuatorCommand& cmd, const Vec3& flow,
                      double dt) const;

    /// Generalized hydrodynamic + actuator + restoring force at the given state,
    /// excluding the inertial term.
    Vec6 generalized_force(const VehicleState& state, const ActuatorCommand& cmd,
                           const Vec3& flow) const;

    double kinetic_energy(const Vec6& nu) const { return 0.5 * nu.dot(m_ * nu); }
    double propeller_thrust(double rpm, double speed) const;

private:
    Vec6 forces_without_linear_damping(const VehicleState& s, const Vec6& nu_r,
                                       const ActuatorCommand& cmd) const;
    Vec6 linear_damping(const Vec6& nu_r) const;

    VehicleParams p_;
    Mat6 m_rb_;
    Mat6 m_;
};

}  // namespace auvctl
