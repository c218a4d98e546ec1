#pragma once

#include "auvctl/dynamics.hpp"

#include <string>

namespace auvctl {

/// Reference command emitted by the policy: target pitch, yaw rate and propeller speed.
struct Action {
    double pitch = 0.0;     // rad
    double yaw_rate = 0.0;  // rad/s
    double rpm = 0.0;
};

struct SSurfaceParams {
    double zeta1 = 1.0;
    double zeta2 = 1.0;
    double delta_u_gain = 0.0;
    double output_scale = 1.0;

    void validate() const;
};

/// Sigmoid surface law; the sigmoid term lies in (-1, 1) and delta_u is added on top.
double s_surface_update(const SSurfaceParams& p, double e, double e_dot, double delta_u);

struct PidParams {
    double kp = 1.0;
    double ki = 0.0;
    double kd = 0.0;
    double integral_clamp = 0.5;  // bound on |ki * integral|
    double output_scale = 1.0;
    double derivative_tau = 0.0;  // s; 0 uses the raw backward difference

    void validate() const;
};

class Pid {
public:
    explicit Pid(PidParams p = {});
    double update(double e, double dt);
    void reset();
    const PidParams& params() const { return p_; }
    double integral_term() const { return p_.ki * integral_; }
    double derivative_term() const { return p_.kd * d_filt_; }

private:
    PidParams p_;
    double integral_ = 0.0;
    double prev_e_ = 0.0;
    double d_filt_ = 0.0;
    bool primed_ = false;
};

struct SmcParams {
    double model_omega = 1.0;     // reference-model natural frequency, rad/s
    double model_damping = 1.0;
    double surface_gain = 1.0;    // lambda in s = e_r + lambda * e
    double switching_gain = 0.5;
    double boundary_layer = 0.1;
    double nomoto_gain = 0.5;     // steady yaw rate per rad of rudder
    double nomoto_time = 1.0;     // s
    double max_model_rate = kMaxYawRate;
    PidParams depth_pi{1.5, 0.2, 0.0, 0.3, 1.0, 0.0};

    void validate() const;
};

/// Second-order reference model on heading with rate limiting.
class ReferenceModel {
public:
    explicit ReferenceModel(double omega = 1.0, double damping = 1.0, double max_rate = kMaxYawRate);
    void reset(double value);
    void update(double reference, double dt);
    double value() const { return x_; }
    double rate() const { return v_; }
    double accel() const { return a_; }

private:
    double omega_, damping_, max_rate_;
    double x_ = 0.0, v_ = 0.0, a_ = 0.0;
    double x1_ = 0.0;  // first cascade stage for damping >= 1
};

/// Yaw sliding-mode controller tracking a reference-model output with Nomoto compensation.
class SmcYaw {
public:
    explicit SmcYaw(SmcParams p = {});
    void reset(double heading);
    /// Returns rudder angle in rad (not clamped).
    double update(double heading_ref, double heading, double yaw_rate, double dt);
    double sliding_variable() const { return s_; }
    double switching_term() const { return switching_; }
    const ReferenceModel& model() const { return model_; }

private:
    SmcParams p_;
    ReferenceModel model_;
    double s_ = 0.0;
    double switching_ = 0.0;
    bool primed_ = false;
};

/// Convenience wrapper matching the single-call form: a fresh controller primed at
/// `state`'s heading and advanced one tick toward `ref`.
double smc_update(const SmcParams& p, double ref, const VehicleState& state, double dt);

enum class ControllerKind { SSurface, PID, PVS };
std::string to_string(ControllerKind k);
ControllerKind controller_kind_from_string(const std::string& s);

struct ControllerConfig {
    ControllerKind kind = ControllerKind::SSurface;
    SSurfaceParams yaw_ss{6.0, 6.0, 0.0, 1.0};
    SSurfaceParams pitch_ss{4.0, 2.0, 0.0, 1.0};
    PidParams yaw_pid{3.0, 0.02, 3.0, 0.2, 1.0, 0.1};
    PidParams pitch_pid{1.0, 0.1, 0.5, 0.2, 1.0, 0.1};
    SmcParams smc{};
    double derivative_tau = 0.1;  // low-pass on backward-difference error rates
    double theta_max = 0.35;

    /// S-surface gains tuned on the heading/depth probes; used as the tuned comparison point.
    static ControllerConfig tuned_s_surface();

    void validate() const;
};

/// One vehicle's yaw, pitch and speed channels plus the integrated heading reference.
class ControllerBank {
public:
    ControllerBank(ControllerConfig cfg, VehicleParams vehicle = VehicleParams::remus100());

    void reset(const VehicleState& state);
    /// Overrides the integrated heading reference (scripted heading probes).
    void set_heading_reference(double psi);

    ActuatorCommand update(const Action& action, const VehicleState& state, const Vec3& measured_flow,
                           double dt);

    const ControllerConfig& config() const { return cfg_; }
    ControllerKind kind() const { return cfg_.kind; }
    double heading_reference() const { return psi_ref_; }
    double yaw_error() const { return e_yaw_; }
    double pitch_error() const { return e_pitch_; }
    double yaw_error_rate() const { return de_yaw_; }
    const ActuatorCommand& last_command() const { return prev_; }

private:
    void low_pass_rate(double diff, double& rate, double dt) const;

    ControllerConfig cfg_;
    VehicleParams vehicle_;
    Pid yaw_pid_, pitch_pid_, depth_pi_;
    SmcYaw smc_;
    double psi_ref_ = 0.0;
    double e_yaw_ = 0.0, e_pitch_ = 0.0;
    double prev_e_yaw_ = 0.0, prev_e_pitch_ = 0.0;
    double de_yaw_ = 0.0, de_pitch_ = 0.0;
    bool primed_ = false;
    bool first_tick_ = true;
    ActuatorCommand prev_;
};

/// Outer depth loop for scripted probes: pitch command from depth error (NED, z down).
double depth_to_pitch(double depth_ref, double depth, double vertical_speed, double kp, double kd,
                      double theta_max);

}  // namespace auvctl
