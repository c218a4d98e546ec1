#pragma once

#include "auvctl/dynamics.hpp"
#include "auvctl/ocean.hpp"
#include "auvctl/perception.hpp"

#include <array>
#include <string>
#include <vector>

namespace auvctl {

enum class TaskKind { Waypoint, DataCollection, TargetTracking };
std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

/// Width of the task-specific observation slots.
int task_width(TaskKind k);

/// Reward components in their fixed order.
inline constexpr int kRewardComponentCount = 6;
inline const std::array<std::string, kRewardComponentCount> kRewardComponentNames{
    "progress", "proximity", "collision", "seabed", "energy", "smoothness"};
using RewardVector = std::array<double, kRewardComponentCount>;

struct ScenarioParams {
    TaskKind kind = TaskKind::DataCollection;
    int auv_count = 1;
    double collision_radius = 0.5;
    double start_depth = 15.0;
    double edge_margin = 30.0;  // keep spawned entities this far from the terrain edge
    int obstacle_count = 0;
    double obstacle_radius = 3.0;
    double duration = 600.0;  // s
    int max_attempts = 1000;

    // Data collection.
    int node_count = 20;
    double service_radius = 15.0;
    double service_dwell = 3.0;
    double node_min_depth = 10.0;
    double node_seabed_margin = 5.0;

    // Target tracking.
    double target_speed = 1.0;
    double target_max_turn_rate = 0.05;
    double standoff = 10.0;
    double standoff_band = 5.0;
    double comm_distance = 100.0;
    double depth_band_min = 10.0;
    double depth_band_max = 30.0;

    // Waypoint.
    double waypoint_min_distance = 40.0;
    double waypoint_max_distance = 80.0;
    double waypoint_radius = 5.0;
    // Hold variant: arrival does not end the episode and proximity accrues per second inside the radius.
    bool waypoint_hold = false;

    void validate() const;
    static ScenarioParams waypoint();
    static ScenarioParams data_collection();
    static ScenarioParams target_tracking();
};

/// Immutable spawned layout for one episode.
struct Scenario {
    ScenarioParams params;
    std::uint64_t seed = 0;
    std::vector<VehicleState> starts;
    std::vector<Vec3> nodes;        // data collection
    Vec3 waypoint = Vec3::Zero();   // waypoint task
    std::vector<Vec3> target_path;  // tracking target sampled at the control rate
    std::vector<SphereObstacle> obstacles;

    Vec3 target_at(double t) const;
    Vec3 target_velocity_at(double t) const;
};

Scenario spawn(const ScenarioParams& p, std::uint64_t seed, const Terrain& terrain);

struct PowerModel {
    double hotel = 40.0;      // W
    double prop_max = 300.0;  // W at rpm_max
    double rpm_max = kMaxRpm;
};

double power_draw(double rpm, const PowerModel& pm = {});

struct EpisodeMetrics {
    int ssn = 0;
    double ec = 0.0;  // mean power, W
    double dt = 0.0;  // danger time, s
    int collisions = 0;
    double tracking_rms = 0.0;
    double duration = 0.0;
    double energy = 0.0;  // J
    double tracking_sq_sum = 0.0;
    long tracking_samples = 0;
};

inline constexpr double kDangerClearance = 10.0;

/// Advances the running metrics by one tick of length dt.
void update_metrics(EpisodeMetrics& m, double clearance, double power, double dt, int newly_served,
                    int new_collisions, const double* tracking_error = nullptr);

/// Per-vehicle quantities for one control tick.
struct TickInfo {
    double distance_before = 0.0;  // to the objective held at tick start
    double distance_after = 0.0;
    int served = 0;
    bool reached = false;
    bool in_band = false;
    int collisions = 0;
    double clearance = 1e9;
    double rpm = 0.0;
    double yaw_rate_cmd = 0.0;
    double prev_yaw_rate_cmd = 0.0;
    double dt = kControlDt;
};

struct RewardShaping {
    double progress_scale = 1.0;  // m per unit progress
    double rpm_max = kMaxRpm;
    double yaw_rate_max = kMaxYawRate;
};

RewardVector reward_components(TaskKind kind, const TickInfo& tick, const RewardShaping& shaping = {});

/// Mutable per-episode task progress shared by all vehicles.
class TaskState {
public:
    TaskState(const Scenario& scenario, const Terrain& terrain);

    const Scenario& scenario() const { return *scenario_; }
    TaskKind kind() const { return scenario_->params.kind; }

    /// World-frame point the given vehicle should approach at time t.
    Vec3 objective(const Vec3& position, double t) const;
    /// Scalar distance whose reduction counts as progress (standoff error for tracking).
    double objective_distance(const Vec3& position, double t) const;
    std::vector<double> task_slots(int vehicle, const std::vector<VehicleState>& fleet, double t) const;

    /// Updates service dwell timers; returns nodes newly served by each vehicle.
    std::vector<int> advance(const std::vector<Vec3>& positions, double dt);
    bool waypoint_reached(const Vec3& position) const;

    int served_count() const;
    int remaining() const;
    bool all_served() const { return remaining() == 0; }
    const std::vector<bool>& served() const { return served_; }

private:
    int nearest_unserved(const Vec3& p, int skip = -1) const;

    const Scenario* scenario_;
    const Terrain* terrain_;
    std::vector<bool> served_;
    std::vector<double> dwell_;
};

/// Seafloor clearance (m) below a NED position.
double seabed_clearance(const Terrain& terrain, const Vec3& position);
/// True when the vehicle body sphere touches the terrain or an obstacle.
bool in_collision(const Terrain& terrain, const std::vector<SphereObstacle>& obstacles, const Vec3& position,
                  double radius);

}  // namespace auvctl
