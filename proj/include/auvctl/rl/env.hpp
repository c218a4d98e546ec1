#pragma once

#include "auvctl/control.hpp"
#include "auvctl/ocean.hpp"
#include "auvctl/perception.hpp"
#include "auvctl/rl/replay.hpp"
#include "auvctl/tasks.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace auvctl::rl {

enum class ControlMode { Controlled, Ideal };
std::string to_string(ControlMode m);
ControlMode control_mode_from_string(const std::string& s);

/// Maps normalized policy outputs in [-1, 1] to physical references.
struct ActionScaling {
    double theta_max = 0.35;
    double yaw_rate_max = kMaxYawRate;
    double rpm_max = kMaxRpm;

    void validate() const;
    Action scale(const Vector& a) const;
    Vector normalize(const Action& a) const;
};

enum class TerrainKind { Procedural, Flat, File };

struct TerrainSource {
    TerrainKind kind = TerrainKind::Procedural;
    double flat_depth = 60.0;
    double min_depth = 35.0;
    double max_depth = 60.0;
    std::string path;
    /// Procedural terrains are regenerated per episode unless a fixed seed is given.
    std::optional<std::uint64_t> fixed_seed;
};

struct EnvConfig {
    ScenarioParams scenario = ScenarioParams::data_collection();
    ControlMode mode = ControlMode::Controlled;
    ControllerConfig controller;
    SeaCondition sea;
    WaveSpectrumParams spectrum;
    int sea_seed_pool = 4;  // distinct wave fields cycled over episode seeds
    SensorNoiseConfig sensors;
    TerrainSource terrain;
    ObservationScales obs_scales;
    RewardShaping shaping;
    RewardWeights weights = RewardWeights::defaults();
    ActionScaling scaling;
    PowerModel power;
    bool terminate_on_collision = false;
    bool record_trace = false;

    void validate() const;
};

struct TickRecord {
    int vehicle = 0;
    double time = 0.0;
    VehicleState state;
    Action action;
    ActuatorCommand command;
    double heading_reference = 0.0;
    Vec3 flow = Vec3::Zero();
    Vec3 objective = Vec3::Zero();
    double clearance = 0.0;
    double reward = 0.0;
};

/// Column names for TickRecord CSV rows.
std::string trace_csv_header();
void write_trace_row(std::ostream& os, const TickRecord& r);

struct StepResult {
    std::vector<Observation> obs;
    std::vector<RewardVector> components;
    std::vector<double> rewards;
    bool terminal = false;   // episode ended by the task or a collision
    bool truncated = false;  // time limit reached
    bool done() const { return terminal || truncated; }
};

/// Closed-loop simulation of one or more vehicles on a shared task at the control rate.
class Environment {
public:
    explicit Environment(EnvConfig cfg);

    const EnvConfig& config() const { return cfg_; }
    EnvConfig& mutable_config() { return cfg_; }
    int obs_width() const;
    static constexpr int action_width() { return 3; }
    int vehicle_count() const { return cfg_.scenario.auv_count; }

    std::vector<Observation> reset(std::uint64_t seed);
    /// One normalized action per vehicle.
    StepResult step(const std::vector<Vector>& actions);

    double time() const { return t_; }
    int tick() const { return tick_; }
    const std::vector<VehicleState>& states() const { return states_; }
    const Scenario& scenario() const { return *scenario_; }
    const Terrain& terrain() const { return *terrain_; }
    const TaskState& task() const { return *task_; }
    const SeaState& sea() const { return *sea_; }
    const std::vector<EpisodeMetrics>& vehicle_metrics() const { return metrics_; }
    /// Fleet totals: served nodes, mean power, summed danger time and collisions.
    EpisodeMetrics metrics() const;
    const std::vector<TickRecord>& trace() const { return trace_; }
    const ControllerBank& bank(int vehicle) const { return banks_.at(static_cast<std::size_t>(vehicle)); }

    /// Shared calm or calibrated sea for a wave seed, memoized per process.
    static std::shared_ptr<const SeaState> sea_for(const WaveSpectrumParams& spectrum, const SeaCondition& sea,
                                                   std::uint64_t wave_seed);

private:
    Observation observe(int vehicle);
    void advance_vehicle(int i, const Action& a, double dt);
    std::shared_ptr<const Terrain> terrain_for(std::uint64_t seed) const;

    EnvConfig cfg_;
    VehicleModel model_;
    std::shared_ptr<const Terrain> terrain_;
    std::shared_ptr<const SeaState> sea_;
    std::unique_ptr<Scenario> scenario_;
    std::unique_ptr<TaskState> task_;
    std::vector<VehicleState> states_;
    std::vector<ControllerBank> banks_;
    std::vector<ActuatorCommand> commands_;
    std::vector<Vec3> measured_flow_;
    std::vector<double> prev_yaw_rate_;
    std::vector<bool> in_contact_;
    std::vector<EpisodeMetrics> metrics_;
    std::vector<TickRecord> trace_;
    Rng sensor_rng_;
    double t_ = 0.0;
    int tick_ = 0;
    int max_ticks_ = 0;
    bool ended_ = true;
};

/// Maps an observation to a normalized action.
using Policy = std::function<Vector(const Observation&)>;

Policy zero_policy();
Policy actor_policy(const Mlp& actor);
Policy random_policy(std::uint64_t seed);

struct GuidanceParams {
    double heading_gain = 2.0;     // normalized yaw-rate command per rad of bearing
    double safe_clearance = 15.0;  // m; climb below this seabed clearance
    double sonar_guard = 20.0;     // m; climb when a forward return is shorter
};

/// Hand-written pursuit law: steers toward the observed objective offset, climbs
/// away from the seabed and from short forward sonar returns.
Policy guidance_policy(const GuidanceParams& g = {});

struct EpisodeResult {
    EpisodeMetrics metrics;
    double episode_return = 0.0;  // summed over vehicles
    RewardVector component_sums{};
    int steps = 0;
    bool terminal = false;
    std::vector<TickRecord> trace;
};

EpisodeResult rollout(Environment& env, const Policy& policy, std::uint64_t seed);

}  // namespace auvctl::rl
