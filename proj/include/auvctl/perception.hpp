#pragma once

#include "auvctl/dynamics.hpp"
#include "auvctl/ocean.hpp"

#include <random>
#include <string>
#include <vector>

namespace auvctl {

using Rng = std::mt19937_64;

enum class PositioningMode { True, Usbl };

struct SensorNoiseConfig {
    double adcp_std = 0.05;        // m/s per axis
    double usbl_base_std = 0.3;    // m
    double usbl_slope_std = 0.5;   // m per 100 m of slant range
    double sonar_std = 0.1;        // m
    double sonar_max_range = 50.0; // m
    int sonar_azimuth_rays = 3;
    int sonar_elevation_rays = 3;
    double sonar_half_fan = 30.0 * kPi / 180.0;  // rad, both azimuth and elevation
    PositioningMode positioning = PositioningMode::True;
    Vec3 usv_position = Vec3::Zero();

    void validate() const;
    int ray_count() const { return sonar_azimuth_rays * sonar_elevation_rays; }
    static SensorNoiseConfig noiseless();
};

struct SphereObstacle {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
};

/// H-ADCP reading: true flow plus i.i.d. Gaussian noise on the horizontal axes.
Vec3 measure_current(const Vec3& true_flow, const SensorNoiseConfig& noise, Rng& rng);

/// USBL fix with per-axis std = base + slope * range / 100.
Vec3 usbl_fix(const Vec3& true_pos, const Vec3& usv_pos, const SensorNoiseConfig& noise, Rng& rng);

/// Distance along a unit world-frame ray to the first terrain or obstacle hit, or
/// max_range if nothing is hit.
double cast_ray(const Vec3& origin, const Vec3& direction, const Terrain& terrain,
                const std::vector<SphereObstacle>& obstacles, double max_range);

/// Body-frame unit directions of the forward sonar fan, row-major over (elevation, azimuth).
std::vector<Vec3> sonar_directions(const SensorNoiseConfig& cfg);

/// One range per ray, clamped to [0, max_range]. Noise is skipped when rng is null.
std::vector<double> sonar_scan(const VehicleState& state, const Terrain& terrain,
                               const std::vector<SphereObstacle>& obstacles, const SensorNoiseConfig& cfg,
                               Rng* rng);

struct ObservationScales {
    double position = 100.0;
    double velocity = 4.0;
    double depth = 60.0;
    double rate = kMaxYawRate;
};

/// Raw per-tick readings feeding the observation.
struct SensorFrame {
    VehicleState state;
    Vec3 position_estimate = Vec3::Zero();  // true position or USBL fix
    Vec3 target = Vec3::Zero();             // world frame
    Vec3 measured_flow = Vec3::Zero();      // world frame
    double seabed_depth = 60.0;             // terrain depth under the vehicle
    std::vector<double> sonar;              // metres
    double sonar_max_range = 50.0;
};

/// Flat normalized observation: p_off(3) v_cur(3) h_d(1) q(4) omega(3) sonar(n) task(m).
struct Observation {
    static constexpr int kPoseWidth = 14;
    Eigen::VectorXd values;
    int sonar_width = 0;
    int task_width = 0;

    int width() const { return static_cast<int>(values.size()); }
    Vec3 p_off() const { return values.segment<3>(0); }
    Vec3 v_cur() const { return values.segment<3>(3); }
    double h_d() const { return values(6); }
    Eigen::Vector4d q() const { return values.segment<4>(7); }
    Vec3 omega() const { return values.segment<3>(11); }
};

Observation build_observation(const SensorFrame& frame, const std::vector<double>& task_slots, int task_width,
                              const ObservationScales& scales = {});

/// Column names matching Observation::values.
std::vector<std::string> observation_columns(int sonar_width, int task_width);

}  // namespace auvctl
