#include "auvctl/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace auvctl {

std::string to_string(TaskKind k) {
    switch (k) {
        case TaskKind::Waypoint: return "waypoint";
        case TaskKind::DataCollection: return "data_collection";
        case TaskKind::TargetTracking: return "target_tracking";
    }
    return "waypoint";
}

TaskKind task_kind_from_string(const std::string& s) {
    std::string l;
    for (char c : s)
        if (c != '_' && c != '-') l.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (l == "waypoint") return TaskKind::Waypoint;
    if (l == "datacollection") return TaskKind::DataCollection;
    if (l == "targettracking" || l == "tracking") return TaskKind::TargetTracking;
    throw ConfigError("unknown task '" + s + "' (expected waypoint, data_collection or target_tracking)");
}

int task_width(TaskKind k) {
    switch (k) {
        case TaskKind::Waypoint: return 0;
        case TaskKind::DataCollection: return 4;
        case TaskKind::TargetTracking: return 6;
    }
    return 0;
}

void ScenarioParams::validate() const {
    if (auv_count < 1) throw InvalidParams("auv_count must be >= 1");
    if (!(collision_radius > 0.0)) throw InvalidParams("collision_radius must be > 0");
    if (!(start_depth >= 0.0)) throw InvalidParams("start_depth must be >= 0");
    if (!(duration > 0.0)) throw InvalidParams("duration must be > 0");
    if (obstacle_count < 0 || !(obstacle_radius > 0.0)) throw InvalidParams("bad obstacle settings");
    if (!(service_radius > 0.0) || !(service_dwell >= 0.0)) throw InvalidParams("bad service rule");
    if (!(target_speed > 0.0 && target_speed <= 1.5)) throw InvalidParams("target speed must be in (0, 1.5] m/s");
    if (!(target_max_turn_rate > 0.0)) throw InvalidParams("target turn rate must be > 0");
    if (!(depth_band_min >= 0.0 && depth_band_max > depth_band_min)) throw InvalidParams("bad depth band");
    if (!(standoff >= 0.0) || !(comm_distance > 0.0)) throw InvalidParams("bad standoff/comm distance");
    if (!(waypoint_min_distance > 0.0 && waypoint_max_distance >= waypoint_min_distance))
        throw InvalidParams("bad waypoint distance range");
    if (!(waypoint_radius > 0.0)) throw InvalidParams("waypoint radius must be > 0");
}

ScenarioParams ScenarioParams::waypoint() {
    ScenarioParams p;
    p.kind = TaskKind::Waypoint;
    p.duration = 60.0;
    return p;
}

ScenarioParams ScenarioParams::data_collection() { return ScenarioParams{}; }

ScenarioParams ScenarioParams::target_tracking() {
    ScenarioParams p;
    p.kind = TaskKind::TargetTracking;
    return p;
}

Vec3 Scenario::target_at(double t) const {
    if (params.kind == TaskKind::Waypoint) return waypoint;
    if (target_path.empty()) return Vec3::Zero();
    const double f = std::max(0.0, t) / kControlDt;
    const auto i = static_cast<std::size_t>(f);
    if (i + 1 >= target_path.size()) return target_path.back();
    const double w = f - static_cast<double>(i);
    return (1.0 - w) * target_path[i] + w * target_path[i + 1];
}

Vec3 Scenario::target_velocity_at(double t) const {
    if (target_path.size() < 2) return Vec3::Zero();
    const auto i = std::min(static_cast<std::size_t>(std::max(0.0, t) / kControlDt), target_path.size() - 2);
    return (target_path[i + 1] - target_path[i]) / kControlDt;
}

namespace {

struct Sampler {
    Rng rng;
    const Terrain& terrain;
    const ScenarioParams& p;

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    Vec2 horizontal() {
        const Vec2 lo = terrain.extent_min(), hi = terrain.extent_max();
        return Vec2(uniform(lo.x() + p.edge_margin, hi.x() - p.edge_margin),
                    uniform(lo.y() + p.edge_margin, hi.y() - p.edge_margin));
    }
    bool inside(const Vec3& q) const {
        const Vec2 lo = terrain.extent_min(), hi = terrain.extent_max();
        return q.x() >= lo.x() + p.edge_margin && q.x() <= hi.x() - p.edge_margin &&
               q.y() >= lo.y() + p.edge_margin && q.y() <= hi.y() - p.edge_margin;
    }
};

}  // namespace

Scenario spawn(const ScenarioParams& p, std::uint64_t seed, const Terrain& terrain) {
    p.validate();
    if (p.kind == TaskKind::DataCollection && p.node_count < 1)
        throw PlacementError("data collection needs at least one sensor node");
    const Vec2 span = terrain.extent_max() - terrain.extent_min();
    if (span.minCoeff() <= 2.0 * p.edge_margin) throw PlacementError("terrain smaller than the edge margin");

    Sampler s{Rng(mix_seed(seed, 0x5ce7)), terrain, p};
    Scenario sc;
    sc.params = p;
    sc.seed = seed;

    auto fail = [](const std::string& what) { throw PlacementError(what + " after bounded retries"); };

    for (int v = 0; v < p.auv_count; ++v) {
        int tries = 0;
        for (;; ++tries) {
            if (tries >= p.max_attempts) fail("could not place vehicle start");
            const Vec2 xy = s.horizontal();
            if (terrain.depth_at(xy.x(), xy.y()) - p.start_depth < kDangerClearance + 5.0) continue;
            bool clear = true;
            for (const auto& o : sc.starts) clear = clear && (o.position.head<2>() - xy).norm() > 10.0;
            if (!clear) continue;
            sc.starts.push_back(
                VehicleState::from_euler(Vec3(xy.x(), xy.y(), p.start_depth), 0.0, 0.0, s.uniform(-kPi, kPi)));
            break;
        }
    }

    if (p.kind == TaskKind::DataCollection) {
        for (int n = 0; n < p.node_count; ++n) {
            int tries = 0;
            for (;; ++tries) {
                if (tries >= p.max_attempts) fail("could not place sensor node");
                const Vec2 xy = s.horizontal();
                const double deepest = terrain.depth_at(xy.x(), xy.y()) - p.node_seabed_margin;
                if (deepest < p.node_min_depth) continue;
                sc.nodes.emplace_back(xy.x(), xy.y(), s.uniform(p.node_min_depth, deepest));
                break;
            }
        }
    } else if (p.kind == TaskKind::Waypoint) {
        int tries = 0;
        for (;; ++tries) {
            if (tries >= p.max_attempts) fail("could not place waypoint");
            const Vec3 o = sc.starts.front().position;
            const double r = s.uniform(p.waypoint_min_distance, p.waypoint_max_distance);
            const double b = s.uniform(-kPi, kPi);
            Vec3 w(o.x() + r * std::cos(b), o.y() + r * std::sin(b), 0.0);
            if (!s.inside(w)) continue;
            const double deepest = std::min(p.depth_band_max, terrain.depth_at(w.x(), w.y()) - 15.0);
            if (deepest < p.depth_band_min) continue;
            w.z() = s.uniform(p.depth_band_min, deepest);
            sc.waypoint = w;
            break;
        }
    } else {
        // Target random walk with bounded speed and turn rate, steered away from the edges.
        const int n = static_cast<int>(std::ceil(p.duration / kControlDt)) + 1;
        const Vec3 o = sc.starts.front().position;
        Vec3 pos;
        int tries = 0;
        for (;; ++tries) {
            if (tries >= p.max_attempts) fail("could not place tracking target");
            const double b = s.uniform(-kPi, kPi);
            pos = Vec3(o.x() + 40.0 * std::cos(b), o.y() + 40.0 * std::sin(b),
                       s.uniform(p.depth_band_min, p.depth_band_max));
            if (s.inside(pos)) break;
        }
        double heading = s.uniform(-kPi, kPi), rate = 0.0, vz = 0.0;
        const Vec2 centre = 0.5 * (terrain.extent_min() + terrain.extent_max());
        std::normal_distribution<double> jitter(0.0, 1.0);
        sc.target_path.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            sc.target_path.push_back(pos);
            const Vec2 ahead = pos.head<2>() + 60.0 * Vec2(std::cos(heading), std::sin(heading));
            if (!s.inside(Vec3(ahead.x(), ahead.y(), 0.0))) {
                const Vec2 to_c = centre - pos.head<2>();
                const double err = wrap_angle(std::atan2(to_c.y(), to_c.x()) - heading);
                rate = std::copysign(p.target_max_turn_rate, err);
            } else {
                rate = std::clamp(rate + 0.02 * jitter(s.rng) * p.target_max_turn_rate, -p.target_max_turn_rate,
                                  p.target_max_turn_rate);
            }
            heading = wrap_angle(heading + rate * kControlDt);
            vz = std::clamp(vz + 0.01 * jitter(s.rng), -0.3, 0.3);
            if (pos.z() + vz * kControlDt < p.depth_band_min || pos.z() + vz * kControlDt > p.depth_band_max) vz = -vz;
            const double horiz = std::sqrt(std::max(0.0, p.target_speed * p.target_speed - vz * vz));
            pos += kControlDt * Vec3(horiz * std::cos(heading), horiz * std::sin(heading), vz);
        }
    }

    for (int k = 0; k < p.obstacle_count; ++k) {
        int tries = 0;
        for (;; ++tries) {
            if (tries >= p.max_attempts) fail("could not place obstacle");
            const Vec2 xy = s.horizontal();
            const double deepest = terrain.depth_at(xy.x(), xy.y()) - p.obstacle_radius - 5.0;
            if (deepest < 10.0) continue;
            const Vec3 c(xy.x(), xy.y(), s.uniform(10.0, deepest));
            bool clear = true;
            for (const auto& st : sc.starts) clear = clear && (st.position - c).norm() > 20.0 + p.obstacle_radius;
            if (!clear) continue;
            sc.obstacles.push_back({c, p.obstacle_radius});
            break;
        }
    }
    return sc;
}

double power_draw(double rpm, const PowerModel& pm) {
    const double r = std::clamp(rpm, 0.0, pm.rpm_max) / pm.rpm_max;
    return pm.hotel + pm.prop_max * r * r * r;
}

void update_metrics(EpisodeMetrics& m, double clearance, double power, double dt, int newly_served,
                    int new_collisions, const double* tracking_error) {
    if (clearance < kDangerClearance) m.dt += dt;
    m.energy += power * dt;
    m.duration += dt;
    m.ec = m.energy / m.duration;
    m.ssn += newly_served;
    m.collisions += new_collisions;
    if (tracking_error) {
        m.tracking_sq_sum += *tracking_error * *tracking_error;
        ++m.tracking_samples;
        m.tracking_rms = std::sqrt(m.tracking_sq_sum / static_cast<double>(m.tracking_samples));
    }
}

RewardVector reward_components(TaskKind kind, const TickInfo& t, const RewardShaping& sh) {
    RewardVector r{};
    r[0] = (t.distance_before - t.distance_after) / sh.progress_scale;
    switch (kind) {
        case TaskKind::DataCollection: r[1] = t.served; break;
        case TaskKind::Waypoint: r[1] = t.reached ? 1.0 : (t.in_band ? t.dt : 0.0); break;
        case TaskKind::TargetTracking: r[1] = t.in_band ? t.dt : 0.0; break;
    }
    r[2] = -static_cast<double>(t.collisions);
    if (t.clearance < kDangerClearance)
        r[3] = -(0.5 + 0.5 * std::min(1.0, (kDangerClearance - t.clearance) / kDangerClearance));
    const double n = std::clamp(t.rpm / sh.rpm_max, 0.0, 1.0);
    r[4] = -n * n * n;
    r[5] = -std::abs(t.yaw_rate_cmd - t.prev_yaw_rate_cmd) / sh.yaw_rate_max;
    return r;
}

TaskState::TaskState(const Scenario& scenario, const Terrain& terrain)
    : scenario_(&scenario),
      terrain_(&terrain),
      served_(scenario.nodes.size(), false),
      dwell_(scenario.nodes.size(), 0.0) {}

int TaskState::nearest_unserved(const Vec3& p, int skip) const {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scenario_->nodes.size(); ++i) {
        if (served_[i] || static_cast<int>(i) == skip) continue;
        const double d = (scenario_->nodes[i] - p).norm();
        if (d < bd) {
            bd = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

Vec3 TaskState::objective(const Vec3& position, double t) const {
    switch (kind()) {
        case TaskKind::Waypoint: return scenario_->waypoint;
        case TaskKind::TargetTracking: return scenario_->target_at(t);
        case TaskKind::DataCollection: {
            const int i = nearest_unserved(position);
            return i < 0 ? position : scenario_->nodes[static_cast<std::size_t>(i)];
        }
    }
    return position;
}

double TaskState::objective_distance(const Vec3& position, double t) const {
    const double d = (objective(position, t) - position).norm();
    if (kind() == TaskKind::TargetTracking) return std::abs(d - scenario_->params.standoff);
    return d;
}

std::vector<double> TaskState::task_slots(int vehicle, const std::vector<VehicleState>& fleet, double t) const {
    const VehicleState& s = fleet.at(static_cast<std::size_t>(vehicle));
    const auto& p = scenario_->params;
    std::vector<double> out;
    switch (kind()) {
        case TaskKind::Waypoint: break;
        case TaskKind::DataCollection: {
            const int first = nearest_unserved(s.position);
            const int second = first < 0 ? -1 : nearest_unserved(s.position, first);
            Vec3 off = Vec3::Zero();
            if (second >= 0) {
                off = world_to_body(s.attitude, scenario_->nodes[static_cast<std::size_t>(second)] - s.position) / 100.0;
                if (off.norm() > 1.0) off.normalize();
            }
            out = {off.x(), off.y(), off.z(),
                   scenario_->nodes.empty() ? 0.0
                                            : static_cast<double>(remaining()) / static_cast<double>(scenario_->nodes.size())};
            break;
        }
        case TaskKind::TargetTracking: {
            const Vec3 tv = world_to_body(s.attitude, scenario_->target_velocity_at(t)) / 4.0;
            const double range = (scenario_->target_at(t) - s.position).norm();
            double nearest = 0.0;
            if (fleet.size() > 1) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < fleet.size(); ++j)
                    if (static_cast<int>(j) != vehicle) best = std::min(best, (fleet[j].position - s.position).norm());
                nearest = std::min(1.0, best / p.comm_distance);
            }
            out = {tv.x(), tv.y(), tv.z(), std::clamp((range - p.standoff) / 100.0, -1.0, 1.0), nearest,
                   std::clamp(scenario_->target_at(t).z() / 60.0, 0.0, 1.0)};
            break;
        }
    }
    return out;
}

std::vector<int> TaskState::advance(const std::vector<Vec3>& positions, double dt) {
    std::vector<int> credit(positions.size(), 0);
    if (kind() != TaskKind::DataCollection) return credit;
    const auto& p = scenario_->params;
    for (std::size_t i = 0; i < scenario_->nodes.size(); ++i) {
        if (served_[i]) continue;
        int closest = -1;
        double bd = p.service_radius;
        for (std::size_t v = 0; v < positions.size(); ++v) {
            const double d = (positions[v] - scenario_->nodes[i]).norm();
            if (d <= bd) {
                bd = d;
                closest = static_cast<int>(v);
            }
        }
        if (closest < 0) {
            dwell_[i] = 0.0;
            continue;
        }
        dwell_[i] += dt;
        if (dwell_[i] >= p.service_dwell - 1e-9) {
            served_[i] = true;
            ++credit[static_cast<std::size_t>(closest)];
        }
    }
    return credit;
}

bool TaskState::waypoint_reached(const Vec3& position) const {
    return (scenario_->waypoint - position).norm() <= scenario_->params.waypoint_radius;
}

int TaskState::served_count() const {
    return static_cast<int>(std::count(served_.begin(), served_.end(), true));
}

int TaskState::remaining() const { return static_cast<int>(served_.size()) - served_count(); }

double seabed_clearance(const Terrain& terrain, const Vec3& position) {
    return terrain.depth_at(position.x(), position.y()) - position.z();
}

bool in_collision(const Terrain& terrain, const std::vector<SphereObstacle>& obstacles, const Vec3& position,
                  double radius) {
    if (seabed_clearance(terrain, position) < radius) return true;
    for (const auto& o : obstacles)
        if ((o.center - position).norm() < o.radius + radius) return true;
    return false;
}

}  // namespace auvctl
