#include "auvctl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace auvctl {

using nlohmann::json;

namespace {

std::string terrain_name(rl::TerrainKind k) {
    switch (k) {
        case rl::TerrainKind::Procedural: return "procedural";
        case rl::TerrainKind::Flat: return "flat";
        case rl::TerrainKind::File: return "file";
    }
    return "procedural";
}

rl::TerrainKind terrain_from(const std::string& s) {
    if (s == "procedural") return rl::TerrainKind::Procedural;
    if (s == "flat") return rl::TerrainKind::Flat;
    if (s == "file") return rl::TerrainKind::File;
    throw ConfigError("unknown terrain kind '" + s + "' (expected procedural, flat or file)");
}

// Scalar conversions shared by the reader and the writer.
template <class T>
void load(const json& j, T& x) {
    x = j.get<T>();
}
void load(const json& j, Vec3& v) {
    const auto a = j.get<std::vector<double>>();
    if (a.size() != 3) throw ConfigError("expected a 3-element array");
    v = Vec3(a[0], a[1], a[2]);
}
void load(const json& j, Vec2& v) {
    const auto a = j.get<std::vector<double>>();
    if (a.size() != 2) throw ConfigError("expected a 2-element array");
    v = Vec2(a[0], a[1]);
}
void load(const json& j, std::optional<std::uint64_t>& v) {
    if (j.is_null()) v.reset();
    else v = j.get<std::uint64_t>();
}
void load(const json& j, TaskKind& k) { k = task_kind_from_string(j.get<std::string>()); }
void load(const json& j, SeaRegime& k) { k = sea_regime_from_string(j.get<std::string>()); }
void load(const json& j, ControllerKind& k) { k = controller_kind_from_string(j.get<std::string>()); }
void load(const json& j, rl::ControlMode& k) { k = rl::control_mode_from_string(j.get<std::string>()); }
void load(const json& j, rl::TerrainKind& k) { k = terrain_from(j.get<std::string>()); }
void load(const json& j, PositioningMode& k) {
    const auto s = j.get<std::string>();
    if (s == "true") k = PositioningMode::True;
    else if (s == "usbl") k = PositioningMode::Usbl;
    else throw ConfigError("unknown positioning '" + s + "' (expected true or usbl)");
}

template <class T>
json save(const T& x) {
    return x;
}
json save(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
json save(const Vec2& v) { return {v.x(), v.y()}; }
json save(const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); }
json save(TaskKind k) { return to_string(k); }
json save(SeaRegime k) { return to_string(k); }
json save(ControllerKind k) { return to_string(k); }
json save(rl::ControlMode k) { return rl::to_string(k); }
json save(rl::TerrainKind k) { return terrain_name(k); }
json save(PositioningMode k) { return k == PositioningMode::True ? "true" : "usbl"; }

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    template <class T>
    void field(const char* key, T& x) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        try {
            load(j_.at(key), x);
        } catch (const json::exception& e) {
            throw ConfigError(path_ + key + ": " + e.what());
        } catch (const Error& e) {
            throw ConfigError(path_ + key + ": " + e.what());
        }
    }

    template <class F>
    void section(const char* key, F&& f) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        Reader sub(j_.at(key), path_ + key + ".");
        f(sub);
        sub.finish();
    }

    void weights(const char* key, rl::RewardWeights& w) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        const json& o = j_.at(key);
        if (!o.is_object()) throw ConfigError(path_ + key + " must be an object");
        for (const auto& [name, v] : o.items()) {
            if (!v.is_number()) throw ConfigError(path_ + key + "." + name + " must be a number");
            try {
                w.set(name, v.get<double>());
            } catch (const Error& e) {
                throw ConfigError(path_ + key + "." + name + ": " + e.what());
            }
        }
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw ConfigError("unknown key '" + path_ + k + "'");
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_.substr(0, path_.size() - 1); }
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

class Writer {
public:
    explicit Writer(json& j) : j_(j) { j_ = json::object(); }
    template <class T>
    void field(const char* key, T& x) {
        j_[key] = save(x);
    }
    template <class F>
    void section(const char* key, F&& f) {
        Writer sub(j_[key]);
        f(sub);
    }
    void weights(const char* key, rl::RewardWeights& w) {
        json o = json::object();
        for (std::size_t i = 0; i < w.names.size(); ++i) o[w.names[i]] = w.values[i];
        j_[key] = o;
    }

private:
    json& j_;
};

template <class V>
void visit_ss(V& v, SSurfaceParams& p) {
    v.field("zeta1", p.zeta1);
    v.field("zeta2", p.zeta2);
    v.field("delta_u_gain", p.delta_u_gain);
    v.field("output_scale", p.output_scale);
}

template <class V>
void visit_pid(V& v, PidParams& p) {
    v.field("kp", p.kp);
    v.field("ki", p.ki);
    v.field("kd", p.kd);
    v.field("integral_clamp", p.integral_clamp);
    v.field("output_scale", p.output_scale);
    v.field("derivative_tau", p.derivative_tau);
}

template <class V>
void visit_controller(V& v, ControllerConfig& c) {
    v.field("kind", c.kind);
    v.section("yaw_ss", [&](auto& s) { visit_ss(s, c.yaw_ss); });
    v.section("pitch_ss", [&](auto& s) { visit_ss(s, c.pitch_ss); });
    v.section("yaw_pid", [&](auto& s) { visit_pid(s, c.yaw_pid); });
    v.section("pitch_pid", [&](auto& s) { visit_pid(s, c.pitch_pid); });
    v.section("smc", [&](auto& s) {
        auto& m = c.smc;
        s.field("model_omega", m.model_omega);
        s.field("model_damping", m.model_damping);
        s.field("surface_gain", m.surface_gain);
        s.field("switching_gain", m.switching_gain);
        s.field("boundary_layer", m.boundary_layer);
        s.field("nomoto_gain", m.nomoto_gain);
        s.field("nomoto_time", m.nomoto_time);
        s.field("max_model_rate", m.max_model_rate);
        s.section("depth_pi", [&](auto& d) { visit_pid(d, m.depth_pi); });
    });
    v.field("derivative_tau", c.derivative_tau);
    v.field("theta_max", c.theta_max);
}

template <class V>
void visit_spectrum(V& v, WaveSpectrumParams& p) {
    v.field("alpha", p.alpha);
    v.field("f_p", p.f_p);
    v.field("gamma_peak", p.gamma_peak);
    v.field("sigma_a", p.sigma_a);
    v.field("sigma_b", p.sigma_b);
    v.field("depth", p.depth);
    v.field("f_min", p.f_min);
    v.field("f_max", p.f_max);
    v.field("n_freq", p.n_freq);
    v.field("n_dir", p.n_dir);
    v.field("principal_heading", p.principal_heading);
    v.field("repeat_period", p.repeat_period);
}

template <class V>
void visit_scenario(V& v, ScenarioParams& s) {
    v.field("kind", s.kind);
    v.field("auv_count", s.auv_count);
    v.field("collision_radius", s.collision_radius);
    v.field("start_depth", s.start_depth);
    v.field("edge_margin", s.edge_margin);
    v.field("obstacle_count", s.obstacle_count);
    v.field("obstacle_radius", s.obstacle_radius);
    v.field("duration", s.duration);
    v.field("max_attempts", s.max_attempts);
    v.field("node_count", s.node_count);
    v.field("service_radius", s.service_radius);
    v.field("service_dwell", s.service_dwell);
    v.field("node_min_depth", s.node_min_depth);
    v.field("node_seabed_margin", s.node_seabed_margin);
    v.field("target_speed", s.target_speed);
    v.field("target_max_turn_rate", s.target_max_turn_rate);
    v.field("standoff", s.standoff);
    v.field("standoff_band", s.standoff_band);
    v.field("comm_distance", s.comm_distance);
    v.field("depth_band_min", s.depth_band_min);
    v.field("depth_band_max", s.depth_band_max);
    v.field("waypoint_min_distance", s.waypoint_min_distance);
    v.field("waypoint_max_distance", s.waypoint_max_distance);
    v.field("waypoint_radius", s.waypoint_radius);
    v.field("waypoint_hold", s.waypoint_hold);
}

template <class V>
void visit_sensors(V& v, SensorNoiseConfig& s) {
    v.field("adcp_std", s.adcp_std);
    v.field("usbl_base_std", s.usbl_base_std);
    v.field("usbl_slope_std", s.usbl_slope_std);
    v.field("sonar_std", s.sonar_std);
    v.field("sonar_max_range", s.sonar_max_range);
    v.field("sonar_azimuth_rays", s.sonar_azimuth_rays);
    v.field("sonar_elevation_rays", s.sonar_elevation_rays);
    v.field("sonar_half_fan", s.sonar_half_fan);
    v.field("positioning", s.positioning);
    v.field("usv_position", s.usv_position);
}

template <class V>
void visit_sea(V& v, SeaCondition& s) {
    v.field("regime", s.regime);
    v.field("current", s.current);
    v.field("scale", s.scale);
}

template <class V>
void visit(V& v, RunConfig& c) {
    v.field("vehicle", c.vehicle);
    auto& e = c.env;
    v.section("spectrum", [&](auto& s) { visit_spectrum(s, e.spectrum); });
    v.section("sea", [&](auto& s) { visit_sea(s, e.sea); });
    v.section("controller", [&](auto& s) { visit_controller(s, e.controller); });
    v.section("task", [&](auto& s) { visit_scenario(s, e.scenario); });
    v.section("env", [&](auto& s) {
        s.field("mode", e.mode);
        s.field("sea_seed_pool", e.sea_seed_pool);
        s.section("sensors", [&](auto& x) { visit_sensors(x, e.sensors); });
        s.section("terrain", [&](auto& x) {
            x.field("kind", e.terrain.kind);
            x.field("flat_depth", e.terrain.flat_depth);
            x.field("min_depth", e.terrain.min_depth);
            x.field("max_depth", e.terrain.max_depth);
            x.field("path", e.terrain.path);
            x.field("fixed_seed", e.terrain.fixed_seed);
        });
        s.section("obs_scales", [&](auto& x) {
            x.field("position", e.obs_scales.position);
            x.field("velocity", e.obs_scales.velocity);
            x.field("depth", e.obs_scales.depth);
            x.field("rate", e.obs_scales.rate);
        });
        s.weights("weights", e.weights);
        s.section("scaling", [&](auto& x) {
            x.field("theta_max", e.scaling.theta_max);
            x.field("yaw_rate_max", e.scaling.yaw_rate_max);
            x.field("rpm_max", e.scaling.rpm_max);
        });
        s.section("power", [&](auto& x) {
            x.field("hotel", e.power.hotel);
            x.field("prop_max", e.power.prop_max);
            x.field("rpm_max", e.power.rpm_max);
        });
        s.field("progress_scale", e.shaping.progress_scale);
        s.field("terminate_on_collision", e.terminate_on_collision);
    });
    v.section("rl", [&](auto& s) {
        auto& t = c.train;
        s.field("total_steps", t.total_steps);
        s.field("seed", t.seed);
        s.field("stop_after", t.stop_after);
        s.field("updates_per_step", t.updates_per_step);
        s.field("gamma", t.td3.gamma);
        s.field("tau", t.td3.tau);
        s.field("policy_delay", t.td3.policy_delay);
        s.field("target_noise", t.td3.target_noise);
        s.field("noise_clip", t.td3.noise_clip);
        s.field("exploration_noise", t.td3.exploration_noise);
        s.field("batch_size", t.td3.batch_size);
        s.field("replay_capacity", t.td3.replay_capacity);
        s.field("actor_lr", t.td3.actor_lr);
        s.field("critic_lr", t.td3.critic_lr);
        s.field("warmup_steps", t.td3.warmup_steps);
        s.field("max_episode_steps", t.td3.max_episode_steps);
        s.field("hidden", t.td3.hidden);
    });
    v.section("llm", [&](auto& s) {
        auto& l = c.llm;
        s.field("client", l.client);
        s.field("fixtures_dir", l.fixtures_dir);
        s.field("memory_client", l.memory_client);
        s.field("budget", l.loop.budget);
        s.field("phase1_iterations", l.loop.phase1_iterations);
        s.field("malformed_retries", l.loop.malformed_retries);
        s.field("stagnation_tol", l.loop.stagnation_tol);
        s.field("stagnation_patience", l.loop.stagnation_patience);
        s.field("digest_cap", l.loop.prompt.digest_cap);
        s.field("max_prompt_chars", l.loop.prompt.max_chars);
        s.field("environment_text", l.loop.prompt.environment);
        s.field("requirements_text", l.loop.prompt.requirements);
        s.field("safety_text", l.loop.prompt.safety);
        s.field("guidelines_text", l.loop.prompt.guidelines);
        s.field("retrain_steps", l.retrain_steps);
        s.field("eval_seeds", l.eval_seeds);
        s.field("reference_seed", l.reference_seed);
        s.field("reference_duration", l.reference_duration);
        s.section("utility", [&](auto& u) {
            u.field("ssn", l.loop.utility.ssn);
            u.field("ec", l.loop.utility.ec);
            u.field("dt", l.loop.utility.dt);
            u.field("collision", l.loop.utility.collision);
            u.field("tracking", l.loop.utility.tracking);
        });
    });
    v.section("probe", [&](auto& s) {
        auto& p = c.probe;
        s.field("rpm", p.rpm);
        s.field("depth", p.depth);
        s.field("heading", p.heading);
        s.field("trim_time", p.trim_time);
        s.field("origin", p.origin);
        s.field("depth_kp", p.depth_kp);
        s.field("depth_kd", p.depth_kd);
        s.field("wave_seed", p.wave_seed);
    });
    v.field("seeds", c.seeds);
    v.field("output_dir", c.output_dir);
    v.field("policy", c.policy);
    v.field("threads", c.threads);
}

}  // namespace

void RunConfig::validate() const {
    if (vehicle != "remus100") throw ConfigError("unknown vehicle '" + vehicle + "' (only remus100 is available)");
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (llm.client != "rule" && llm.client != "fixture" && llm.client != "http")
        throw ConfigError("llm.client must be rule, fixture or http");
    if (llm.retrain_steps < 0) throw ConfigError("llm.retrain_steps must be >= 0");
    if (llm.eval_seeds.empty()) throw ConfigError("llm.eval_seeds must not be empty");
    try {
        env.validate();
        train.validate();
        llm.loop.validate();
        probe.validate();
    } catch (const InvalidParams& e) {
        throw ConfigError(e.what());
    }
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    Reader r(j, "");
    visit(r, c);
    r.finish();
    c.train.td3.seed = c.train.seed;
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json j;
    RunConfig copy = *this;
    Writer w(j);
    visit(w, copy);
    return j;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

}  // namespace auvctl
