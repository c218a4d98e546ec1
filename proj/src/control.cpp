#include "auvctl/control.hpp"

#include <algorithm>
#include <cctype>

namespace auvctl {

void SSurfaceParams::validate() const {
    if (!(zeta1 > 0.0) || !(zeta2 > 0.0)) throw InvalidParams("S-surface zeta1 and zeta2 must be > 0");
    if (!(delta_u_gain >= 0.0)) throw InvalidParams("S-surface delta_u_gain must be >= 0");
    if (!(output_scale > 0.0)) throw InvalidParams("S-surface output_scale must be > 0");
}

double s_surface_update(const SSurfaceParams& p, double e, double e_dot, double delta_u) {
    // 2/(1+exp(-x)) - 1 == tanh(x/2), which keeps full precision near zero.
    return std::tanh(0.5 * (p.zeta1 * e + p.zeta2 * e_dot)) + delta_u;
}

void PidParams::validate() const {
    if (kp < 0.0 || ki < 0.0 || kd < 0.0) throw InvalidParams("PID gains must be >= 0");
    if (!(integral_clamp >= 0.0)) throw InvalidParams("PID integral clamp must be >= 0");
    if (!(output_scale > 0.0)) throw InvalidParams("PID output_scale must be > 0");
    if (!(derivative_tau >= 0.0)) throw InvalidParams("PID derivative_tau must be >= 0");
}

Pid::Pid(PidParams p) : p_(p) { p_.validate(); }

void Pid::reset() {
    integral_ = 0.0;
    prev_e_ = 0.0;
    d_filt_ = 0.0;
    primed_ = false;
}

double Pid::update(double e, double dt) {
    if (!(dt > 0.0)) throw DomainError("PID dt must be > 0");
    if (p_.ki > 0.0) {
        const double limit = p_.integral_clamp / p_.ki;
        integral_ = std::clamp(integral_ + e * dt, -limit, limit);
    }
    const double raw = primed_ ? (e - prev_e_) / dt : 0.0;
    if (p_.derivative_tau > 0.0) d_filt_ += dt / (p_.derivative_tau + dt) * (raw - d_filt_);
    else d_filt_ = raw;
    prev_e_ = e;
    primed_ = true;
    return p_.output_scale * (p_.kp * e + p_.ki * integral_ + p_.kd * d_filt_);
}

void SmcParams::validate() const {
    if (!(model_omega > 0.0) || !(model_damping > 0.0)) throw InvalidParams("SMC reference model needs omega, damping > 0");
    if (!(surface_gain > 0.0)) throw InvalidParams("SMC surface gain must be > 0");
    if (!(switching_gain >= 0.0)) throw InvalidParams("SMC switching gain must be >= 0");
    if (!(boundary_layer > 0.0)) throw InvalidParams("SMC boundary layer must be > 0");
    if (!(nomoto_gain > 0.0) || !(nomoto_time > 0.0)) throw InvalidParams("SMC Nomoto constants must be > 0");
    if (!(max_model_rate > 0.0)) throw InvalidParams("SMC max model rate must be > 0");
    depth_pi.validate();
}

ReferenceModel::ReferenceModel(double omega, double damping, double max_rate)
    : omega_(omega), damping_(damping), max_rate_(max_rate) {}

void ReferenceModel::reset(double value) {
    x_ = x1_ = value;
    v_ = a_ = 0.0;
}

void ReferenceModel::update(double reference, double dt) {
    const double x_prev = x_, v_prev = v_;
    if (damping_ >= 1.0) {
        // Two exact first-order stages: monotone, so a step never overshoots.
        const double root = std::sqrt(damping_ * damping_ - 1.0);
        const double p1 = omega_ * (damping_ - root), p2 = omega_ * (damping_ + root);
        x1_ += (1.0 - std::exp(-p1 * dt)) * (reference - x1_);
        const double step = (1.0 - std::exp(-p2 * dt)) * (x1_ - x_);
        x_ += std::clamp(step, -max_rate_ * dt, max_rate_ * dt);
        v_ = (x_ - x_prev) / dt;
    } else {
        const double a = omega_ * omega_ * (reference - x_) - 2.0 * damping_ * omega_ * v_;
        v_ = std::clamp(v_ + a * dt, -max_rate_, max_rate_);
        x_ += v_ * dt;
    }
    a_ = (v_ - v_prev) / dt;
}

SmcYaw::SmcYaw(SmcParams p)
    : p_(p), model_(p.model_omega, p.model_damping, p.max_model_rate) {
    p_.validate();
}

void SmcYaw::reset(double heading) {
    model_.reset(heading);
    s_ = switching_ = 0.0;
    primed_ = true;
}

double SmcYaw::update(double heading_ref, double heading, double yaw_rate, double dt) {
    if (!(dt > 0.0)) throw DomainError("SMC dt must be > 0");
    if (!primed_) reset(heading);
    // The model state is unwrapped; feed it the nearest equivalent of the reference.
    model_.update(model_.value() + wrap_angle(heading_ref - model_.value()), dt);
    const double e = wrap_angle(heading - model_.value());
    const double e_r = yaw_rate - model_.rate();
    s_ = e_r + p_.surface_gain * e;
    switching_ = p_.switching_gain * std::clamp(s_ / p_.boundary_layer, -1.0, 1.0);
    const double t = p_.nomoto_time, k = p_.nomoto_gain;
    return t / k * (model_.accel() + yaw_rate / t - p_.surface_gain * e_r - switching_);
}

double smc_update(const SmcParams& p, double ref, const VehicleState& state, double dt) {
    SmcYaw c(p);
    c.reset(state.yaw());
    return c.update(ref, state.yaw(), state.nu(5), dt);
}

std::string to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::SSurface: return "s_surface";
        case ControllerKind::PID: return "pid";
        case ControllerKind::PVS: return "pvs";
    }
    return "s_surface";
}

ControllerKind controller_kind_from_string(const std::string& s) {
    std::string l;
    for (char c : s) l.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    std::erase(l, '-');
    std::erase(l, '_');
    if (l == "ssurface" || l == "s") return ControllerKind::SSurface;
    if (l == "pid") return ControllerKind::PID;
    if (l == "pvs" || l == "smc") return ControllerKind::PVS;
    throw ConfigError("unknown controller kind '" + s + "' (expected s_surface, pid or pvs)");
}

void ControllerConfig::validate() const {
    yaw_ss.validate();
    pitch_ss.validate();
    yaw_pid.validate();
    pitch_pid.validate();
    smc.validate();
    if (!(derivative_tau >= 0.0)) throw InvalidParams("derivative_tau must be >= 0");
    if (!(theta_max > 0.0 && theta_max < kPi / 2.0)) throw InvalidParams("theta_max must be in (0, pi/2)");
}

ControllerBank::ControllerBank(ControllerConfig cfg, VehicleParams vehicle)
    : cfg_(std::move(cfg)),
      vehicle_(std::move(vehicle)),
      yaw_pid_(cfg_.yaw_pid),
      pitch_pid_(cfg_.pitch_pid),
      depth_pi_(cfg_.smc.depth_pi),
      smc_(cfg_.smc) {
    cfg_.validate();
}

void ControllerBank::reset(const VehicleState& state) {
    psi_ref_ = state.yaw();
    e_yaw_ = e_pitch_ = prev_e_yaw_ = prev_e_pitch_ = de_yaw_ = de_pitch_ = 0.0;
    yaw_pid_.reset();
    pitch_pid_.reset();
    depth_pi_.reset();
    smc_.reset(state.yaw());
    primed_ = true;
    first_tick_ = true;
    prev_ = ActuatorCommand{};
}

void ControllerBank::set_heading_reference(double psi) { psi_ref_ = wrap_angle(psi); }

void ControllerBank::low_pass_rate(double diff, double& rate, double dt) const {
    const double raw = diff / dt;
    if (cfg_.derivative_tau > 0.0) rate += dt / (cfg_.derivative_tau + dt) * (raw - rate);
    else rate = raw;
}

ActuatorCommand ControllerBank::update(const Action& action, const VehicleState& state,
                                       const Vec3& measured_flow, double dt) {
    if (!(dt > 0.0)) throw DomainError("controller dt must be > 0");
    if (!primed_) reset(state);
    psi_ref_ = wrap_angle(psi_ref_ + action.yaw_rate * dt);
    const double theta_ref = std::clamp(action.pitch, -cfg_.theta_max, cfg_.theta_max);

    const double e_yaw = wrap_angle(psi_ref_ - state.yaw());
    const double e_pitch = theta_ref - state.pitch();
    if (first_tick_) {
        prev_e_yaw_ = e_yaw;
        prev_e_pitch_ = e_pitch;
        first_tick_ = false;
    }
    // Wrap the yaw difference so a crossing of +-pi does not spike the rate.
    low_pass_rate(wrap_angle(e_yaw - prev_e_yaw_), de_yaw_, dt);
    low_pass_rate(e_pitch - prev_e_pitch_, de_pitch_, dt);
    prev_e_yaw_ = e_yaw_ = e_yaw;
    prev_e_pitch_ = e_pitch_ = e_pitch;

    // Cross-track flow in the body frame drives the yaw feedforward.
    const Vec3 flow_body = world_to_body(state.attitude, measured_flow);
    const double dmax = vehicle_.delta_max;

    double u_yaw = 0.0, u_pitch = 0.0;
    switch (cfg_.kind) {
        case ControllerKind::SSurface:
            u_yaw = cfg_.yaw_ss.output_scale *
                    s_surface_update(cfg_.yaw_ss, e_yaw, de_yaw_, cfg_.yaw_ss.delta_u_gain * flow_body.y());
            u_pitch = cfg_.pitch_ss.output_scale *
                      s_surface_update(cfg_.pitch_ss, e_pitch, de_pitch_, 0.0);
            break;
        case ControllerKind::PID:
            u_yaw = yaw_pid_.update(e_yaw, dt);
            u_pitch = pitch_pid_.update(e_pitch, dt);
            break;
        case ControllerKind::PVS:
            u_yaw = smc_.update(psi_ref_, state.yaw(), state.nu(5), dt) / dmax;
            u_pitch = depth_pi_.update(e_pitch, dt);
            break;
    }

    ActuatorCommand raw;
    raw.rudder = dmax * u_yaw;
    // Positive stern-plane deflection pitches the nose down.
    raw.stern_plane = -dmax * u_pitch;
    raw.propeller = action.rpm;
    prev_ = saturate(raw, prev_, dt, vehicle_);
    return prev_;
}

ControllerConfig ControllerConfig::tuned_s_surface() {
    ControllerConfig c;
    c.yaw_ss = {20.0, 12.0, 0.0, 1.0};
    c.pitch_ss = {12.0, 6.0, 0.0, 1.0};
    return c;
}

double depth_to_pitch(double depth_ref, double depth, double vertical_speed, double kp, double kd,
                      double theta_max) {
    // Deeper target (positive error) needs nose down, i.e. negative pitch.
    return std::clamp(-(kp * (depth_ref - depth) - kd * vertical_speed), -theta_max, theta_max);
}

}  // namespace auvctl
