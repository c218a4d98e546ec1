#include "auvctl/probe.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace auvctl {

double ChannelTrace::error(std::size_t k) const {
    const double e = reference.at(k) - actual.at(k);
    return angular ? wrap_angle(e) : e;
}

double ChannelTrace::rms_error() const {
    if (actual.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s += error(k) * error(k);
    return std::sqrt(s / static_cast<double>(size()));
}

double ChannelTrace::mean_abs_error() const {
    if (actual.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s += std::abs(error(k));
    return s / static_cast<double>(size());
}

double ProbeResult::tracking_rms() const { return yaw.rms_error() * 180.0 / kPi + depth.rms_error(); }

void ReferenceSeries::validate() const {
    if (!(dt > 0.0)) throw InvalidParams("reference dt must be > 0");
    if (heading.size() != depth.size())
        throw LengthMismatch("reference heading and depth lengths differ");
    if (heading.empty()) throw InvalidParams("reference series is empty");
    for (std::size_t k = 0; k < size(); ++k)
        if (!std::isfinite(heading[k]) || !std::isfinite(depth[k]) || depth[k] < 0.0)
            throw InvalidParams("reference sample " + std::to_string(k) + " is not a finite depth/heading");
}

void ProbeConfig::validate() const {
    if (!(rpm > 0.0)) throw InvalidParams("probe rpm must be > 0");
    if (!(depth > 0.0)) throw InvalidParams("probe depth must be > 0");
    if (trim_time < 0.0) throw InvalidParams("probe trim_time must be >= 0");
    if (depth_kp < 0.0 || depth_kd < 0.0) throw InvalidParams("probe depth gains must be >= 0");
}

namespace {

ProbeResult run_probe(const ControllerConfig& ctrl, const ProbeConfig& cfg, double trim_heading, double trim_depth,
                      const ReferenceSeries& ref) {
    cfg.validate();
    ref.validate();
    const double dt = ref.dt;
    const VehicleModel model(VehicleParams::remus100());
    const auto sea = rl::Environment::sea_for(cfg.spectrum, cfg.sea, cfg.wave_seed);
    ControllerBank bank(ctrl, model.params());

    VehicleState s = VehicleState::from_euler(Vec3(cfg.origin.x(), cfg.origin.y(), trim_depth), 0.0, 0.0,
                                              trim_heading);
    s.nu(0) = kMaxSpeed * cfg.rpm / kMaxRpm;
    bank.reset(s);
    double t = 0.0;

    const auto tick = [&](double psi_ref, double z_ref) {
        const Vec3 flow = sea->total_flow(s.position, t);
        const double w = (s.attitude * s.nu.head<3>()).z();
        bank.set_heading_reference(psi_ref);
        const Action a{depth_to_pitch(z_ref, s.position.z(), w, cfg.depth_kp, cfg.depth_kd, ctrl.theta_max), 0.0,
                       cfg.rpm};
        const ActuatorCommand c = bank.update(a, s, flow, dt);
        s = model.step(s, c, flow, dt);
        if (s.position.z() < 0.0) s.position.z() = 0.0;
        t += dt;
        return c;
    };

    const int trim_ticks = static_cast<int>(std::lround(cfg.trim_time / dt));
    for (int k = 0; k < trim_ticks; ++k) tick(trim_heading, trim_depth);

    ProbeResult out;
    out.dt = dt;
    out.yaw.angular = true;
    const std::size_t n = ref.size();
    for (ChannelTrace* ch : {&out.yaw, &out.depth}) {
        ch->reference.reserve(n);
        ch->actual.reserve(n);
        ch->saturated.reserve(n);
    }
    out.states.reserve(n);
    out.commands.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const ActuatorCommand c = tick(ref.heading[k], ref.depth[k]);
        out.yaw.reference.push_back(wrap_angle(ref.heading[k]));
        out.yaw.actual.push_back(s.yaw());
        out.yaw.saturated.push_back((c.saturation & kRudderSaturated) != 0);
        out.depth.reference.push_back(ref.depth[k]);
        out.depth.actual.push_back(s.position.z());
        out.depth.saturated.push_back((c.saturation & kSternSaturated) != 0);
        out.states.push_back(s);
        out.commands.push_back(c);
    }
    return out;
}

}  // namespace

ProbeResult step_probe(const ControllerConfig& ctrl, const ProbeConfig& cfg, double heading_step,
                       double depth_step, double duration) {
    if (!(duration > 0.0)) throw InvalidParams("probe duration must be > 0");
    ReferenceSeries ref;
    const auto n = static_cast<std::size_t>(std::lround(duration / ref.dt));
    ref.heading.assign(n, cfg.heading + heading_step);
    ref.depth.assign(n, cfg.depth + depth_step);
    return run_probe(ctrl, cfg, cfg.heading, cfg.depth, ref);
}

ProbeResult reference_probe(const ControllerConfig& ctrl, const ProbeConfig& cfg, const ReferenceSeries& ref) {
    ref.validate();
    return run_probe(ctrl, cfg, ref.heading.front(), ref.depth.front(), ref);
}

ReferenceSeries record_tracking_reference(std::uint64_t seed, double duration) {
    rl::EnvConfig c;
    c.scenario = ScenarioParams::target_tracking();
    c.scenario.duration = duration;
    c.mode = rl::ControlMode::Ideal;
    c.terrain.kind = rl::TerrainKind::Flat;
    c.sensors = SensorNoiseConfig::noiseless();
    c.record_trace = true;
    rl::Environment env(c);
    const rl::EpisodeResult r = rl::rollout(env, rl::guidance_policy(), seed);
    ReferenceSeries ref;
    ref.heading.reserve(r.trace.size());
    ref.depth.reserve(r.trace.size());
    for (const auto& rec : r.trace) {
        ref.heading.push_back(rec.state.yaw());
        ref.depth.push_back(rec.state.position.z());
    }
    return ref;
}

std::string probe_csv_header() {
    return "time,heading_ref,heading,depth_ref,depth,rudder,stern_plane,rudder_saturated,stern_saturated,x,y,z";
}

void write_probe_csv(std::ostream& os, const ProbeResult& r) {
    os << probe_csv_header() << '\n';
    char buf[384];
    for (std::size_t k = 0; k < r.yaw.size(); ++k) {
        const auto& s = r.states[k];
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%d,%.9g,%.9g,%.9g\n",
                      (static_cast<double>(k) + 1.0) * r.dt, r.yaw.reference[k], r.yaw.actual[k],
                      r.depth.reference[k], r.depth.actual[k], r.commands[k].rudder, r.commands[k].stern_plane,
                      r.yaw.saturated[k] ? 1 : 0, r.depth.saturated[k] ? 1 : 0, s.position.x(), s.position.y(),
                      s.position.z());
        os << buf;
    }
}

}  // namespace auvctl
