#include "auvctl/dynamics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>

namespace auvctl {
namespace {

Mat3 skew(const Vec3& a) {
    Mat3 s;
    s << 0.0, -a.z(), a.y(),
         a.z(), 0.0, -a.x(),
         -a.y(), a.x(), 0.0;
    return s;
}

// Coriolis-centripetal matrix of a 6x6 inertia matrix.
Mat6 m2c(const Mat6& m, const Vec6& nu) {
    const Vec3 nu1 = nu.head<3>();
    const Vec3 nu2 = nu.tail<3>();
    const Vec3 d1 = m.topLeftCorner<3, 3>() * nu1 + m.topRightCorner<3, 3>() * nu2;
    const Vec3 d2 = m.bottomLeftCorner<3, 3>() * nu1 + m.bottomRightCorner<3, 3>() * nu2;
    Mat6 c = Mat6::Zero();
    c.topRightCorner<3, 3>() = -skew(d1);
    c.bottomLeftCorner<3, 3>() = -skew(d1);
    c.bottomRightCorner<3, 3>() = -skew(d2);
    return c;
}

Quat exp_rotation(const Vec3& omega, double h) {
    const double angle = omega.norm() * h;
    if (angle < 1e-15) return Quat::Identity();
    return Quat(Eigen::AngleAxisd(angle, omega.normalized()));
}

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

}  // namespace

double VehicleState::roll() const {
    const Quat& q = attitude;
    return std::atan2(2.0 * (q.w() * q.x() + q.y() * q.z()),
                      1.0 - 2.0 * (q.x() * q.x() + q.y() * q.y()));
}

double VehicleState::pitch() const {
    const Quat& q = attitude;
    return std::asin(std::clamp(2.0 * (q.w() * q.y() - q.z() * q.x()), -1.0, 1.0));
}

double VehicleState::yaw() const {
    const Quat& q = attitude;
    return wrap_angle(std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()),
                                 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z())));
}

VehicleState VehicleState::from_euler(const Vec3& position, double roll, double pitch,
                                      double yaw) {
    VehicleState s;
    s.position = position;
    s.attitude = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                 Eigen::AngleAxisd(roll, Vec3::UnitX());
    s.attitude.normalize();
    return s;
}

Mat6 VehicleParams::rigid_body_mass() const {
    Mat6 m_cg = Mat6::Zero();
    m_cg.diagonal() << mass, mass, mass, inertia.x(), inertia.y(), inertia.z();
    Mat6 h = Mat6::Identity();
    h.topRightCorner<3, 3>() = skew(r_bg).transpose();
    return h.transpose() * m_cg * h;
}

Mat6 VehicleParams::mass_matrix() const {
    Mat6 m = rigid_body_mass();
    m.diagonal() += added_mass;
    return m;
}

VehicleParams VehicleParams::remus100_uncalibrated() {
    VehicleParams p;
    const double a = p.length / 2.0;
    const double b = p.diameter / 2.0;
    p.inertia = Vec3((2.0 / 5.0) * p.mass * b * b, (1.0 / 5.0) * p.mass * (a * a + b * b),
                     (1.0 / 5.0) * p.mass * (a * a + b * b));
    p.lift_area = 0.7 * p.length * p.diameter;

    // Lamb's k-factors for a prolate spheroid.
    const double e = std::sqrt(1.0 - (b / a) * (b / a));
    const double lg = std::log((1.0 + e) / (1.0 - e));
    const double alpha0 = 2.0 * (1.0 - e * e) / std::pow(e, 3) * (0.5 * lg - e);
    const double beta0 = 1.0 / (e * e) - (1.0 - e * e) / (2.0 * std::pow(e, 3)) * lg;
    const double k1 = alpha0 / (2.0 - alpha0);
    const double k2 = beta0 / (2.0 - beta0);
    const double kp = std::pow(e, 4) * (beta0 - alpha0) /
                      ((2.0 - e * e) * (2.0 * std::pow(e, 4) - (2.0 - e * e) * (beta0 - alpha0)));
    const double displaced = 4.0 / 3.0 * kPi * p.rho * a * b * b;
    p.added_mass << displaced * k1, displaced * k2, displaced * k2, 0.3 * p.inertia.x(),
        kp * p.inertia.y(), kp * p.inertia.z();

    const Mat6 m = p.mass_matrix();
    const double bg = p.r_bg.z() - p.r_bb.z();
    const double w_roll = std::sqrt(p.weight() * bg / m(3, 3));
    const double w_pitch = std::sqrt(p.weight() * bg / m(4, 4));
    const double t_surge = 20.0, t_sway = 20.0, t_heave = 20.0, t_yaw = 1.0;
    const double zeta_roll = 0.3, zeta_pitch = 0.8;
    p.linear_damping << m(0, 0) / t_surge, m(1, 1) / t_sway, m(2, 2) / t_heave,
        m(3, 3) * 2.0 * zeta_roll * w_roll, m(4, 4) * 2.0 * zeta_pitch * w_pitch, m(5, 5) / t_yaw;
    return p;
}

const VehicleParams& VehicleParams::remus100() {
    static const VehicleParams calibrated =
        calibrate_envelope(remus100_uncalibrated(), kMaxSpeed, kMaxYawRate);
    return calibrated;
}

namespace {

VehicleState run_straight(const VehicleModel& model, const ActuatorCommand& cmd, double seconds) {
    VehicleState s;
    const int n = static_cast<int>(std::lround(seconds / kControlDt));
    for (int i = 0; i < n; ++i) s = model.step(s, cmd, Vec3::Zero(), kControlDt);
    return s;
}

}  // namespace

VehicleParams calibrate_envelope(VehicleParams p, double top_speed, double yaw_rate) {
    // Surge: thrust at rpm_max and top speed balances drag plus residual linear damping.
    {
        VehicleModel model(p);
        const double thrust = (1.0 - p.thrust_deduction) * model.propeller_thrust(p.rpm_max, top_speed);
        const double lin = p.linear_damping(0) * std::exp(-p.linear_damping_fade * top_speed) * top_speed;
        const double frontal = kPi * std::pow(p.diameter / 2.0, 2);
        const double q = 0.5 * p.rho * top_speed * top_speed;
        p.drag_coefficient = (thrust - lin) / (q * frontal);
        if (!(p.drag_coefficient > 0.0))
            throw InvalidParams("propeller too weak for requested top speed");
    }
    // Yaw: bisect on a common fin-lift scale for the requested full-rudder turn rate.
    // Fin sideslip lift and cross-flow drag bound the turn rate, so the linear yaw
    // damping alone cannot reach the envelope.
    {
        const ActuatorCommand cmd{p.delta_max, 0.0, p.rpm_max, 0};
        auto rate_for = [&](double scale) {
            VehicleParams trial = p;
            trial.rudder_lift *= scale;
            trial.stern_lift *= scale;
            return std::abs(run_straight(VehicleModel(trial), cmd, 60.0).nu(5));
        };
        double lo = 0.05, hi = 40.0;
        if (rate_for(hi) < yaw_rate) throw InvalidParams("fins too weak for requested yaw rate");
        if (rate_for(lo) > yaw_rate) throw InvalidParams("fins too strong for requested yaw rate");
        for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (rate_for(mid) < yaw_rate) lo = mid;
            else hi = mid;
        }
        const double scale = 0.5 * (lo + hi);
        p.rudder_lift *= scale;
        p.stern_lift *= scale;
    }
    return p;
}

ActuatorCommand saturate(const ActuatorCommand& raw, const ActuatorCommand& prev, double dt,
                         const VehicleParams& p) {
    ActuatorCommand out;
    out.rudder = clamp_abs(raw.rudder, p.delta_max);
    out.stern_plane = clamp_abs(raw.stern_plane, p.delta_max);
    out.propeller = std::clamp(raw.propeller, 0.0, p.rpm_max);
    if (std::abs(raw.rudder) > p.delta_max) out.saturation |= kRudderSaturated;
    if (std::abs(raw.stern_plane) > p.delta_max) out.saturation |= kSternSaturated;
    if (raw.propeller > p.rpm_max || raw.propeller < 0.0) out.saturation |= kPropellerSaturated;

    const double fin_step = p.fin_slew * dt;
    const double rpm_step = p.rpm_slew * dt;
    out.rudder = std::clamp(out.rudder, prev.rudder - fin_step, prev.rudder + fin_step);
    out.stern_plane =
        std::clamp(out.stern_plane, prev.stern_plane - fin_step, prev.stern_plane + fin_step);
    out.propeller = std::clamp(out.propeller, prev.propeller - rpm_step, prev.propeller + rpm_step);
    return out;
}

Vec3 body_to_world(const Quat& attitude, const Vec3& v_body) {
    if (std::abs(attitude.norm() - 1.0) > 1e-6)
        throw NonUnitQuaternion("attitude norm " + std::to_string(attitude.norm()));
    return attitude * v_body;
}

Vec3 world_to_body(const Quat& attitude, const Vec3& v_world) {
    if (std::abs(attitude.norm() - 1.0) > 1e-6)
        throw NonUnitQuaternion("attitude norm " + std::to_string(attitude.norm()));
    return attitude.conjugate() * v_world;
}

VehicleModel::VehicleModel(VehicleParams params) : p_(std::move(params)) {
    if (!(p_.mass > 0.0) || !(p_.length > 0.0) || !(p_.rho > 0.0))
        throw InvalidParams("mass, length and rho must be positive");
    if (!(p_.substep > 0.0) || !(p_.delta_max > 0.0) || !(p_.rpm_max > 0.0))
        throw InvalidParams("substep, delta_max and rpm_max must be positive");
    m_rb_ = p_.rigid_body_mass();
    m_ = p_.mass_matrix();
    if (!m_.allFinite() || (m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * m_.norm())
        throw InvalidParams("mass matrix is not symmetric");
    Eigen::LLT<Mat6> llt(m_);
    if (llt.info() != Eigen::Success) throw InvalidParams("mass matrix is not positive definite");
    if ((p_.linear_damping.array() < 0.0).any()) throw InvalidParams("negative linear damping");
}

double VehicleModel::propeller_thrust(double rpm, double speed) const {
    const double n = rpm / 60.0;
    const double d = p_.prop_diameter;
    if (n > 0.0) {
        const double va = p_.wake_fraction * speed;
        return p_.rho * std::pow(d, 4) *
               (p_.kt0 * std::abs(n) * n + (p_.kt_max - p_.kt0) / p_.ja_max * (va / d) * std::abs(n));
    }
    return p_.rho * std::pow(d, 4) * p_.kt0 * std::abs(n) * n;
}

Vec6 VehicleModel::linear_damping(const Vec6& nu_r) const {
    Vec6 d = p_.linear_damping;
    const double fade = std::exp(-p_.linear_damping_fade * nu_r.head<3>().norm());
    d(0) *= fade;
    d(1) *= fade;
    return d;
}

Vec6 VehicleModel::forces_without_linear_damping(const VehicleState& s, const Vec6& nu_r,
                                                 const ActuatorCommand& cmd) const {
    const double u_r = nu_r(0), v_r = nu_r(1), w_r = nu_r(2);
    const double p = nu_r(3), q = nu_r(4), r = nu_r(5);
    const double rho = p_.rho;
    (void)p;

    const double rudder = clamp_abs(cmd.rudder, p_.delta_max);
    const double stern = clamp_abs(cmd.stern_plane, p_.delta_max);
    const double rpm = std::clamp(cmd.propeller, 0.0, p_.rpm_max);

    Vec6 tau = Vec6::Zero();

    // Propeller thrust and induced roll torque.
    const double speed = s.nu.head<3>().norm();
    const double n = rpm / 60.0;
    const double d = p_.prop_diameter;
    double x_prop = propeller_thrust(rpm, speed);
    double k_prop = 0.0;
    if (n > 0.0) {
        const double va = p_.wake_fraction * speed;
        k_prop = rho * std::pow(d, 5) *
                 (p_.kq0 * n * n + (p_.kq_max - p_.kq0) / p_.ja_max * (va / d) * n);
    }
    tau(0) += (1.0 - p_.thrust_deduction) * x_prop;
    tau(3) += k_prop / 10.0;

    // Hull lift and drag in the vertical plane; mirrored for reversed flow.
    {
        const double uxz2 = u_r * u_r + w_r * w_r;
        if (uxz2 > 0.0) {
            const double alpha = std::atan2(w_r, std::abs(u_r));
            const double ar = p_.diameter * p_.diameter / p_.lift_area;
            const double cl_alpha = kPi * ar / (1.0 + std::sqrt(1.0 + (ar / 2.0) * (ar / 2.0)));
            const double cl = cl_alpha * alpha;
            const double frontal = kPi * std::pow(p_.diameter / 2.0, 2);
            const double cd0 = p_.drag_coefficient * frontal / p_.lift_area;
            const double cd = cd0 + cl * cl / (kPi * 0.7 * ar);
            const double qdyn = 0.5 * rho * uxz2 * p_.lift_area;
            const double f_drag = qdyn * cd;
            const double f_lift = qdyn * cl;
            double fx = -std::cos(alpha) * f_drag + std::sin(alpha) * f_lift;
            const double fz = -std::sin(alpha) * f_drag - std::cos(alpha) * f_lift;
            if (u_r < 0.0) fx = -fx;
            tau(0) += fx;
            tau(2) += fz;
        }
    }

    // Strip-theory cross-flow drag.
    {
        const int strips = p_.crossflow_strips;
        const double dx = p_.length / strips;
        const double c = 0.5 * rho * p_.diameter * p_.crossflow_cd * dx;
        for (int i = 0; i < strips; ++i) {
            const double x = -p_.length / 2.0 + (i + 0.5) * dx;
            const double vp = v_r + x * r;
            const double wp = w_r - x * q;
            const double dy = -c * std::abs(vp) * vp;
            const double dz = -c * std::abs(wp) * wp;
            tau(1) += dy;
            tau(2) += dz;
            tau(4) += -x * dz;
            tau(5) += x * dy;
        }
    }

    // Control fins: lift from deflection plus local sideslip, linear up to stall.
    {
        const double vf = v_r + p_.rudder_x * r;
        const double wf = w_r - p_.stern_x * q;
        const double ur = std::abs(u_r);
        const double beta_r = (vf == 0.0 && ur == 0.0) ? 0.0 : std::atan2(vf, ur);
        const double beta_s = (wf == 0.0 && ur == 0.0) ? 0.0 : std::atan2(wf, ur);
        const double a_r = clamp_abs(rudder + beta_r, p_.fin_stall);
        const double a_s = clamp_abs(stern + beta_s, p_.fin_stall);
        const double qr = 0.5 * rho * (u_r * u_r + vf * vf) * p_.rudder_area;
        const double qs = 0.5 * rho * (u_r * u_r + wf * wf) * p_.stern_area;
        const double y_r = -qr * p_.rudder_lift * a_r;
        const double z_s = -qs * p_.stern_lift * a_s;
        tau(0) += -0.5 * rho * u_r * u_r * (p_.rudder_area * p_.rudder_lift * rudder * rudder +
                                           p_.stern_area * p_.stern_lift * stern * stern);
        tau(1) += y_r;
        tau(2) += z_s;
        tau(4) += -p_.stern_x * z_s;
        tau(5) += p_.rudder_x * y_r;
    }

    // Rigid-body Coriolis on the absolute velocity; added-mass Coriolis restricted
    // to the rotational block, which keeps the destabilizing Munk moments out.
    tau -= m2c(m_rb_, s.nu) * s.nu;
    const Vec3 a_rot = p_.added_mass.tail<3>().cwiseProduct(nu_r.tail<3>());
    tau.tail<3>() += a_rot.cross(nu_r.tail<3>());

    // Restoring forces from weight and buoyancy.
    const Mat3 rt = s.attitude.toRotationMatrix().transpose();
    const Vec3 f_g = rt * Vec3(0.0, 0.0, p_.weight());
    const Vec3 f_b = -rt * Vec3(0.0, 0.0, p_.buoyancy_force());
    tau.head<3>() += f_g + f_b;
    tau.tail<3>() += p_.r_bg.cross(f_g) + p_.r_bb.cross(f_b);
    return tau;
}

Vec6 VehicleModel::generalized_force(const VehicleState& state, const ActuatorCommand& cmd,
                                     const Vec3& flow) const {
    Vec6 nu_r = state.nu;
    nu_r.head<3>() -= world_to_body(state.attitude, flow);
    return forces_without_linear_damping(state, nu_r, cmd) -
           linear_damping(nu_r).cwiseProduct(nu_r);
}

VehicleState VehicleModel::step(const VehicleState& state, const ActuatorCommand& cmd,
                                const Vec3& flow, double dt) const {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (!flow.allFinite()) throw DomainError("flow must be finite");
    const int n = std::max(1, static_cast<int>(std::ceil(dt / p_.substep - 1e-9)));
    const double h = dt / n;

    // Linear damping is implicit: (M + h D) nu+ = M nu + h (tau + D nu_c). The remaining
    // forces use a Heun predictor-corrector; kinematics use the mean body velocity.
    auto advance = [&](const VehicleState& from, const Vec6& tau, const Vec6& d_lin,
                       const Vec6& nu_c) {
        Mat6 a = m_;
        a.diagonal() += h * d_lin;
        VehicleState to = from;
        to.nu = a.ldlt().solve(m_ * from.nu + h * (tau + d_lin.cwiseProduct(nu_c)));
        const Vec6 nu_mid = 0.5 * (from.nu + to.nu);
        const Quat half = from.attitude * exp_rotation(nu_mid.tail<3>(), 0.5 * h);
        to.position += h * (half * nu_mid.head<3>());
        to.attitude = from.attitude * exp_rotation(nu_mid.tail<3>(), h);
        to.attitude.normalize();
        to.time += h;
        return to;
    };
    auto current_of = [&](const VehicleState& at) {
        Vec6 nu_c = Vec6::Zero();
        nu_c.head<3>() = at.attitude.conjugate() * flow;
        return nu_c;
    };

    VehicleState s = state;
    for (int i = 0; i < n; ++i) {
        const Vec6 nu_c = current_of(s);
        const Vec6 d_lin = linear_damping(s.nu - nu_c);
        const Vec6 tau0 = forces_without_linear_damping(s, s.nu - nu_c, cmd);
        const VehicleState pred = advance(s, tau0, d_lin, nu_c);
        const Vec6 tau1 = forces_without_linear_damping(pred, pred.nu - current_of(pred), cmd);
        s = advance(s, 0.5 * (tau0 + tau1), d_lin, nu_c);
    }
    if (!s.nu.allFinite() || !s.position.allFinite() || !s.attitude.coeffs().allFinite())
        throw NonFiniteState("integration produced a non-finite state at t=" +
                             std::to_string(s.time));
    return s;
}

}  // namespace auvctl
