#include "auvctl/perception.hpp"

#include <algorithm>

namespace auvctl {

void SensorNoiseConfig::validate() const {
    if (adcp_std < 0.0 || usbl_base_std < 0.0 || usbl_slope_std < 0.0 || sonar_std < 0.0)
        throw InvalidParams("sensor noise std must be >= 0");
    if (!(sonar_max_range > 0.0)) throw InvalidParams("sonar max range must be > 0");
    if (sonar_azimuth_rays < 1 || sonar_elevation_rays < 1) throw InvalidParams("sonar needs at least one ray");
    if (!(sonar_half_fan >= 0.0 && sonar_half_fan < kPi / 2.0)) throw InvalidParams("sonar fan must be in [0, pi/2)");
}

SensorNoiseConfig SensorNoiseConfig::noiseless() {
    SensorNoiseConfig c;
    c.adcp_std = c.usbl_base_std = c.usbl_slope_std = c.sonar_std = 0.0;
    return c;
}

Vec3 measure_current(const Vec3& true_flow, const SensorNoiseConfig& noise, Rng& rng) {
    if (!true_flow.allFinite()) throw DomainError("flow must be finite");
    if (noise.adcp_std == 0.0) return true_flow;
    std::normal_distribution<double> n(0.0, noise.adcp_std);
    const double dx = n(rng), dy = n(rng);
    return Vec3(true_flow.x() + dx, true_flow.y() + dy, true_flow.z());
}

Vec3 usbl_fix(const Vec3& true_pos, const Vec3& usv_pos, const SensorNoiseConfig& noise, Rng& rng) {
    const double std = noise.usbl_base_std + noise.usbl_slope_std * (true_pos - usv_pos).norm() / 100.0;
    if (std == 0.0) return true_pos;
    std::normal_distribution<double> n(0.0, std);
    const double dx = n(rng), dy = n(rng), dz = n(rng);
    return true_pos + Vec3(dx, dy, dz);
}

namespace {

double ray_sphere(const Vec3& o, const Vec3& d, const SphereObstacle& s) {
    const Vec3 oc = o - s.center;
    const double b = oc.dot(d);
    const double c = oc.squaredNorm() - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double sq = std::sqrt(disc);
    const double t0 = -b - sq, t1 = -b + sq;
    if (t0 >= 0.0) return t0;
    if (t1 >= 0.0) return 0.0;  // origin inside the sphere
    return std::numeric_limits<double>::infinity();
}

// Positive below the seabed (NED depth exceeds the terrain depth).
double penetration(const Terrain& t, const Vec3& p) { return p.z() - t.depth_at(p.x(), p.y()); }

}  // namespace

double cast_ray(const Vec3& origin, const Vec3& direction, const Terrain& terrain,
                const std::vector<SphereObstacle>& obstacles, double max_range) {
    const Vec3 d = direction.normalized();
    double best = max_range;
    for (const auto& s : obstacles) best = std::min(best, ray_sphere(origin, d, s));

    if (penetration(terrain, origin) >= 0.0) return 0.0;
    const double step = std::min(0.25 * terrain.cell(), 0.5);
    double prev = 0.0;
    for (double t = step; prev < best; t += step) {
        const double tt = std::min(t, best);
        const Vec3 p = origin + tt * d;
        if (terrain.contains(p.x(), p.y()) && penetration(terrain, p) >= 0.0) {
            double lo = prev, hi = tt;
            for (int i = 0; i < 40; ++i) {
                const double mid = 0.5 * (lo + hi);
                (penetration(terrain, origin + mid * d) >= 0.0 ? hi : lo) = mid;
            }
            return std::min(best, hi);
        }
        prev = tt;
    }
    return best;
}

std::vector<Vec3> sonar_directions(const SensorNoiseConfig& cfg) {
    std::vector<Vec3> dirs;
    dirs.reserve(static_cast<std::size_t>(cfg.ray_count()));
    auto angle = [&](int i, int n) {
        return n == 1 ? 0.0 : -cfg.sonar_half_fan + 2.0 * cfg.sonar_half_fan * i / (n - 1);
    };
    for (int ie = 0; ie < cfg.sonar_elevation_rays; ++ie) {
        // Positive elevation looks down (body z is down).
        const double el = angle(ie, cfg.sonar_elevation_rays);
        for (int ia = 0; ia < cfg.sonar_azimuth_rays; ++ia) {
            const double az = angle(ia, cfg.sonar_azimuth_rays);
            dirs.emplace_back(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
        }
    }
    return dirs;
}

std::vector<double> sonar_scan(const VehicleState& state, const Terrain& terrain,
                               const std::vector<SphereObstacle>& obstacles, const SensorNoiseConfig& cfg,
                               Rng* rng) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(cfg.ray_count()));
    std::normal_distribution<double> n(0.0, cfg.sonar_std);
    for (const Vec3& d : sonar_directions(cfg)) {
        double r = cast_ray(state.position, state.attitude * d, terrain, obstacles, cfg.sonar_max_range);
        if (rng && cfg.sonar_std > 0.0) r += n(*rng);
        out.push_back(std::clamp(r, 0.0, cfg.sonar_max_range));
    }
    return out;
}

Observation build_observation(const SensorFrame& f, const std::vector<double>& task_slots, int task_width,
                              const ObservationScales& sc) {
    if (static_cast<int>(task_slots.size()) != task_width)
        throw WidthMismatch("task slots have width " + std::to_string(task_slots.size()) + ", declared " +
                            std::to_string(task_width));
    const int ns = static_cast<int>(f.sonar.size());
    Observation o;
    o.sonar_width = ns;
    o.task_width = task_width;
    o.values.resize(Observation::kPoseWidth + ns + task_width);

    const Quat& q = f.state.attitude;
    Vec3 p_off = world_to_body(q, f.target - f.position_estimate) / sc.position;
    if (p_off.norm() > 1.0) p_off.normalize();
    const Vec3 v_cur = (world_to_body(q, f.measured_flow) / sc.velocity).cwiseMax(-1.0).cwiseMin(1.0);
    const double h_d = std::clamp((f.seabed_depth - f.state.position.z()) / sc.depth, -1.0, 1.0);
    Eigen::Vector4d qv(q.w(), q.x(), q.y(), q.z());
    if (qv(0) < 0.0) qv = -qv;
    const Vec3 w = (f.state.nu.tail<3>() / sc.rate).cwiseMax(-1.0).cwiseMin(1.0);

    o.values.segment<3>(0) = p_off;
    o.values.segment<3>(3) = v_cur;
    o.values(6) = h_d;
    o.values.segment<4>(7) = qv;
    o.values.segment<3>(11) = w;
    for (int i = 0; i < ns; ++i) o.values(Observation::kPoseWidth + i) = std::clamp(f.sonar[i] / f.sonar_max_range, 0.0, 1.0);
    for (int i = 0; i < task_width; ++i)
        o.values(Observation::kPoseWidth + ns + i) = std::clamp(task_slots[i], -1.0, 1.0);
    return o;
}

std::vector<std::string> observation_columns(int sonar_width, int task_width) {
    std::vector<std::string> c{"p_off_x", "p_off_y", "p_off_z", "v_cur_x", "v_cur_y", "v_cur_z", "h_d",
                               "q_w",     "q_x",     "q_y",     "q_z",     "omega_p", "omega_q", "omega_r"};
    for (int i = 0; i < sonar_width; ++i) c.push_back("sonar_" + std::to_string(i));
    for (int i = 0; i < task_width; ++i) c.push_back("task_" + std::to_string(i));
    return c;
}

}  // namespace auvctl
