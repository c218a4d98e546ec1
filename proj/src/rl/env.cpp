#include "auvctl/rl/env.hpp"

#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <tuple>

namespace auvctl::rl {

std::string to_string(ControlMode m) { return m == ControlMode::Ideal ? "ideal" : "controlled"; }

ControlMode control_mode_from_string(const std::string& s) {
    if (s == "ideal") return ControlMode::Ideal;
    if (s == "controlled") return ControlMode::Controlled;
    throw ConfigError("unknown control mode '" + s + "' (expected ideal or controlled)");
}

void ActionScaling::validate() const {
    if (!(theta_max > 0.0) || !(yaw_rate_max > 0.0) || !(rpm_max > 0.0))
        throw InvalidParams("action bounds must be positive");
}

Action ActionScaling::scale(const Vector& a) const {
    if (a.size() != 3) throw WidthMismatch("actions have 3 entries, got " + std::to_string(a.size()));
    if (!a.allFinite()) throw NonFiniteState("non-finite action");
    const auto c = [](double v) { return std::clamp(v, -1.0, 1.0); };
    return {theta_max * c(a(0)), yaw_rate_max * c(a(1)), 0.5 * rpm_max * (c(a(2)) + 1.0)};
}

Vector ActionScaling::normalize(const Action& a) const {
    Vector v(3);
    v << a.pitch / theta_max, a.yaw_rate / yaw_rate_max, 2.0 * a.rpm / rpm_max - 1.0;
    return v.cwiseMax(-1.0).cwiseMin(1.0);
}

void EnvConfig::validate() const {
    scenario.validate();
    controller.validate();
    spectrum.validate();
    sensors.validate();
    scaling.validate();
    weights.validate();
    if (weights.values.size() != kRewardComponentCount)
        throw LengthMismatch("reward weights must cover " + std::to_string(kRewardComponentCount) + " components");
    if (sea_seed_pool < 1) throw InvalidParams("sea seed pool must be >= 1");
    if (terrain.kind == TerrainKind::File && terrain.path.empty()) throw ConfigError("terrain file path is empty");
}

std::string trace_csv_header() {
    return "vehicle,time,x,y,z,roll,pitch,yaw,u,v,w,p,q,r,pitch_ref,yaw_rate_ref,rpm_ref,heading_ref,"
           "rudder,stern_plane,propeller,flow_x,flow_y,objective_x,objective_y,objective_z,clearance,reward";
}

void write_trace_row(std::ostream& os, const TickRecord& r) {
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.9g", v);
        os << buf;
    };
    os << r.vehicle;
    put(r.time);
    for (int k = 0; k < 3; ++k) put(r.state.position(k));
    put(r.state.roll());
    put(r.state.pitch());
    put(r.state.yaw());
    for (int k = 0; k < 6; ++k) put(r.state.nu(k));
    put(r.action.pitch);
    put(r.action.yaw_rate);
    put(r.action.rpm);
    put(r.heading_reference);
    put(r.command.rudder);
    put(r.command.stern_plane);
    put(r.command.propeller);
    put(r.flow.x());
    put(r.flow.y());
    for (int k = 0; k < 3; ++k) put(r.objective(k));
    put(r.clearance);
    put(r.reward);
    os << '\n';
}

namespace {

struct SeaKey {
    std::string spectrum;
    std::uint64_t seed;
    double cx, cy;
    bool operator<(const SeaKey& o) const { return std::tie(spectrum, seed, cx, cy) < std::tie(o.spectrum, o.seed, o.cx, o.cy); }
};

std::string spectrum_key(const WaveSpectrumParams& p) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%a|%a|%a|%a|%a|%a|%a|%a|%d|%d|%a|%a", p.alpha, p.f_p, p.gamma_peak, p.sigma_a,
                  p.sigma_b, p.depth, p.f_min, p.f_max, p.n_freq, p.n_dir, p.principal_heading, p.repeat_period);
    return buf;
}

struct CalibratedField {
    std::shared_ptr<const WaveField> field;
    double gain;
};

std::mutex g_sea_mutex;
std::map<SeaKey, CalibratedField> g_sea_cache;

}  // namespace

std::shared_ptr<const SeaState> Environment::sea_for(const WaveSpectrumParams& spectrum, const SeaCondition& sea,
                                                     std::uint64_t wave_seed) {
    if (sea.regime == SeaRegime::Calm)
        return std::make_shared<SeaState>(std::make_shared<WaveField>(WaveField::calm(spectrum.depth)), sea, 0.0);
    const SeaKey key{spectrum_key(spectrum), wave_seed, sea.current.x(), sea.current.y()};
    {
        std::lock_guard lock(g_sea_mutex);
        const auto it = g_sea_cache.find(key);
        if (it != g_sea_cache.end()) return std::make_shared<SeaState>(it->second.field, sea, it->second.gain);
    }
    auto field = std::make_shared<const WaveField>(WaveField::build(spectrum, wave_seed));
    const double gain = calibrate_wave_gain(*field, sea.current, CalibrationGrid{});
    std::lock_guard lock(g_sea_mutex);
    g_sea_cache.emplace(key, CalibratedField{field, gain});
    return std::make_shared<SeaState>(field, sea, gain);
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)), model_(VehicleParams::remus100()) {
    cfg_.validate();
    if (cfg_.terrain.kind == TerrainKind::File) terrain_ = std::make_shared<const Terrain>(Terrain::load(cfg_.terrain.path));
}

int Environment::obs_width() const {
    return Observation::kPoseWidth + cfg_.sensors.ray_count() + task_width(cfg_.scenario.kind);
}

std::shared_ptr<const Terrain> Environment::terrain_for(std::uint64_t seed) const {
    const auto& ts = cfg_.terrain;
    switch (ts.kind) {
        case TerrainKind::File: return terrain_;
        case TerrainKind::Flat: return std::make_shared<const Terrain>(Terrain::flat(ts.flat_depth, 121, 121, 5.0));
        case TerrainKind::Procedural: break;
    }
    const std::uint64_t s = ts.fixed_seed ? *ts.fixed_seed : mix_seed(seed, 0x7e22);
    return std::make_shared<const Terrain>(Terrain::procedural(s, 121, 121, 5.0, ts.min_depth, ts.max_depth));
}

std::vector<Observation> Environment::reset(std::uint64_t seed) {
    terrain_ = terrain_for(seed);
    const std::uint64_t wave_seed = mix_seed(cfg_.spectrum.n_freq, seed % static_cast<std::uint64_t>(cfg_.sea_seed_pool));
    sea_ = cfg_.mode == ControlMode::Ideal ? sea_for(cfg_.spectrum, SeaCondition::calm(), 0)
                                           : sea_for(cfg_.spectrum, cfg_.sea, wave_seed);
    scenario_ = std::make_unique<Scenario>(spawn(cfg_.scenario, seed, *terrain_));
    task_ = std::make_unique<TaskState>(*scenario_, *terrain_);
    sensor_rng_.seed(mix_seed(seed, 0x5e45));

    const auto n = static_cast<std::size_t>(cfg_.scenario.auv_count);
    states_ = scenario_->starts;
    banks_.assign(n, ControllerBank(cfg_.controller, model_.params()));
    for (std::size_t i = 0; i < n; ++i) banks_[i].reset(states_[i]);
    commands_.assign(n, ActuatorCommand{});
    measured_flow_.assign(n, Vec3::Zero());
    prev_yaw_rate_.assign(n, 0.0);
    in_contact_.assign(n, false);
    metrics_.assign(n, EpisodeMetrics{});
    trace_.clear();
    t_ = 0.0;
    tick_ = 0;
    max_ticks_ = static_cast<int>(std::ceil(cfg_.scenario.duration / kControlDt - 1e-9));
    ended_ = false;

    std::vector<Observation> obs;
    for (int i = 0; i < static_cast<int>(n); ++i) obs.push_back(observe(i));
    return obs;
}

Observation Environment::observe(int i) {
    const auto k = static_cast<std::size_t>(i);
    const VehicleState& s = states_[k];
    SensorFrame f;
    f.state = s;
    f.position_estimate = cfg_.sensors.positioning == PositioningMode::Usbl
                              ? usbl_fix(s.position, cfg_.sensors.usv_position, cfg_.sensors, sensor_rng_)
                              : s.position;
    f.target = task_->objective(f.position_estimate, t_);
    f.measured_flow = cfg_.mode == ControlMode::Ideal
                          ? Vec3::Zero()
                          : measure_current(sea_->total_flow(s.position, t_), cfg_.sensors, sensor_rng_);
    f.seabed_depth = terrain_->depth_at(s.position.x(), s.position.y());
    f.sonar = sonar_scan(s, *terrain_, scenario_->obstacles, cfg_.sensors, &sensor_rng_);
    f.sonar_max_range = cfg_.sensors.sonar_max_range;
    measured_flow_[k] = f.measured_flow;
    return build_observation(f, task_->task_slots(i, states_, t_), task_width(cfg_.scenario.kind), cfg_.obs_scales);
}

void Environment::advance_vehicle(int i, const Action& a, double dt) {
    const auto k = static_cast<std::size_t>(i);
    VehicleState& s = states_[k];
    if (cfg_.mode == ControlMode::Ideal) {
        const double speed = kMaxSpeed * a.rpm / cfg_.scaling.rpm_max;
        const double psi = wrap_angle(s.yaw() + a.yaw_rate * dt);
        const Vec3 v(speed * std::cos(a.pitch) * std::cos(psi), speed * std::cos(a.pitch) * std::sin(psi),
                     -speed * std::sin(a.pitch));
        VehicleState next = VehicleState::from_euler(s.position + dt * v, 0.0, a.pitch, psi);
        next.nu << speed, 0.0, 0.0, 0.0, 0.0, a.yaw_rate;
        next.time = s.time + dt;
        s = next;
        commands_[k] = ActuatorCommand{};
        commands_[k].propeller = a.rpm;
    } else {
        commands_[k] = banks_[k].update(a, s, measured_flow_[k], dt);
        s = model_.step(s, commands_[k], sea_->total_flow(s.position, t_), dt);
    }
    if (s.position.z() < 0.0) s.position.z() = 0.0;
}

StepResult Environment::step(const std::vector<Vector>& actions) {
    if (ended_) throw DomainError("step called on an ended episode; call reset first");
    const auto n = states_.size();
    if (actions.size() != n)
        throw LengthMismatch("expected " + std::to_string(n) + " actions, got " + std::to_string(actions.size()));
    const double dt = kControlDt;
    const TaskKind kind = cfg_.scenario.kind;
    const double radius = cfg_.scenario.collision_radius;

    std::vector<Action> acts(n);
    std::vector<TickInfo> info(n);
    std::vector<Vec3> objective(n);
    for (std::size_t i = 0; i < n; ++i) {
        acts[i] = cfg_.scaling.scale(actions[i]);
        objective[i] = task_->objective(states_[i].position, t_);
        info[i].distance_before = kind == TaskKind::TargetTracking ? task_->objective_distance(states_[i].position, t_)
                                                                   : (objective[i] - states_[i].position).norm();
    }
    for (std::size_t i = 0; i < n; ++i) advance_vehicle(static_cast<int>(i), acts[i], dt);
    t_ += dt;
    ++tick_;

    StepResult out;
    for (std::size_t i = 0; i < n; ++i) {
        VehicleState& s = states_[i];
        if (!all_finite(s.position) || !all_finite(s.nu)) throw NonFiniteState("vehicle state diverged at t=" + std::to_string(t_));
        if (in_collision(*terrain_, scenario_->obstacles, s.position, radius)) {
            if (!in_contact_[i]) {
                ++info[i].collisions;
                in_contact_[i] = true;
                if (cfg_.terminate_on_collision) out.terminal = true;
            }
            const double floor = terrain_->depth_at(s.position.x(), s.position.y()) - radius - 0.05;
            s.position.z() = std::max(0.0, std::min(s.position.z(), floor));
            for (const auto& o : scenario_->obstacles) {
                const Vec3 d = s.position - o.center;
                const double r = o.radius + radius + 0.05;
                if (d.norm() < r) s.position = o.center + (d.norm() > 1e-9 ? d.normalized() : Vec3::UnitZ().eval()) * r;
            }
        } else if (in_contact_[i] && !in_collision(*terrain_, scenario_->obstacles, s.position, radius + 1.0)) {
            in_contact_[i] = false;
        }
    }

    std::vector<Vec3> positions(n);
    for (std::size_t i = 0; i < n; ++i) positions[i] = states_[i].position;
    const std::vector<int> served = task_->advance(positions, dt);

    out.components.resize(n);
    out.rewards.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const VehicleState& s = states_[i];
        TickInfo& ti = info[i];
        ti.distance_after = kind == TaskKind::TargetTracking ? task_->objective_distance(s.position, t_)
                                                             : (objective[i] - s.position).norm();
        ti.served = served[i];
        if (kind == TaskKind::Waypoint) {
            const bool inside = task_->waypoint_reached(s.position);
            (cfg_.scenario.waypoint_hold ? ti.in_band : ti.reached) = inside;
        }
        double tracking_err = 0.0;
        if (kind == TaskKind::TargetTracking) {
            tracking_err = task_->objective_distance(s.position, t_);
            ti.in_band = tracking_err <= cfg_.scenario.standoff_band;
        }
        ti.clearance = seabed_clearance(*terrain_, s.position);
        ti.rpm = acts[i].rpm;
        ti.yaw_rate_cmd = acts[i].yaw_rate;
        ti.prev_yaw_rate_cmd = prev_yaw_rate_[i];
        ti.dt = dt;
        prev_yaw_rate_[i] = acts[i].yaw_rate;

        out.components[i] = reward_components(kind, ti, cfg_.shaping);
        out.rewards[i] = compute_reward(out.components[i], cfg_.weights);
        update_metrics(metrics_[i], ti.clearance, power_draw(commands_[i].propeller, cfg_.power), dt, ti.served,
                       ti.collisions, kind == TaskKind::TargetTracking ? &tracking_err : nullptr);
        if (ti.reached) out.terminal = true;

        if (cfg_.record_trace) {
            TickRecord r;
            r.vehicle = static_cast<int>(i);
            r.time = t_;
            r.state = s;
            r.action = acts[i];
            r.command = commands_[i];
            r.heading_reference = cfg_.mode == ControlMode::Ideal ? s.yaw() : banks_[i].heading_reference();
            r.flow = cfg_.mode == ControlMode::Ideal ? Vec3::Zero() : sea_->total_flow(s.position, t_);
            r.objective = objective[i];
            r.clearance = ti.clearance;
            r.reward = out.rewards[i];
            trace_.push_back(r);
        }
    }
    if (kind == TaskKind::DataCollection && task_->all_served()) out.terminal = true;
    out.truncated = !out.terminal && tick_ >= max_ticks_;
    ended_ = out.done();

    for (int i = 0; i < static_cast<int>(n); ++i) out.obs.push_back(observe(i));
    return out;
}

EpisodeMetrics Environment::metrics() const {
    EpisodeMetrics m;
    for (const auto& v : metrics_) {
        m.ssn += v.ssn;
        m.ec += v.ec / static_cast<double>(metrics_.size());
        m.dt += v.dt;
        m.collisions += v.collisions;
        m.energy += v.energy;
        m.tracking_sq_sum += v.tracking_sq_sum;
        m.tracking_samples += v.tracking_samples;
    }
    m.duration = t_;
    m.tracking_rms = m.tracking_samples > 0 ? std::sqrt(m.tracking_sq_sum / static_cast<double>(m.tracking_samples)) : 0.0;
    return m;
}

Policy zero_policy() {
    return [](const Observation&) { return Vector(Vector::Zero(3)); };
}

Policy actor_policy(const Mlp& actor) {
    auto net = std::make_shared<const Mlp>(actor);
    return [net](const Observation& o) { return net->forward(o.values); };
}

Policy random_policy(std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    return [rng](const Observation&) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vector a(3);
        for (int k = 0; k < 3; ++k) a(k) = u(*rng);
        return a;
    };
}

Policy guidance_policy(const GuidanceParams& g) {
    return [g](const Observation& o) {
        const Vec3 p = 100.0 * o.p_off();
        const double horiz = std::hypot(p.x(), p.y());
        const double bearing = std::atan2(p.y(), p.x());
        double theta = std::atan2(-p.z(), std::max(horiz, 5.0));

        const double clearance = 60.0 * o.h_d();
        if (clearance < g.safe_clearance)
            theta = std::max(theta, 0.35 * std::min(1.0, (g.safe_clearance - clearance) / 5.0));
        double nearest = 1.0;
        for (int k = 0; k < o.sonar_width; ++k) nearest = std::min(nearest, o.values(Observation::kPoseWidth + k));
        const double ahead = 50.0 * nearest;
        if (ahead < g.sonar_guard) theta = std::max(theta, 0.35 * std::min(1.0, (g.sonar_guard - ahead) / 15.0));

        double speed = 1.0;
        if (o.task_width == task_width(TaskKind::TargetTracking)) {
            const double range = p.norm();
            speed = std::clamp(0.45 + 0.1 * (range - 10.0), 0.0, 1.0);
        }
        Vector a(3);
        a << std::clamp(theta / 0.35, -1.0, 1.0), std::clamp(g.heading_gain * bearing, -1.0, 1.0), 2.0 * speed - 1.0;
        return a;
    };
}

EpisodeResult rollout(Environment& env, const Policy& policy, std::uint64_t seed) {
    EpisodeResult res;
    std::vector<Observation> obs = env.reset(seed);
    std::vector<Vector> actions(obs.size());
    for (;;) {
        for (std::size_t i = 0; i < obs.size(); ++i) actions[i] = policy(obs[i]);
        StepResult st = env.step(actions);
        for (std::size_t i = 0; i < st.rewards.size(); ++i) {
            res.episode_return += st.rewards[i];
            for (int c = 0; c < kRewardComponentCount; ++c) res.component_sums[c] += st.components[i][c];
        }
        ++res.steps;
        obs = std::move(st.obs);
        if (st.done()) {
            res.terminal = st.terminal;
            break;
        }
    }
    res.metrics = env.metrics();
    res.trace = env.trace();
    return res;
}

}  // namespace auvctl::rl
