#pragma once

#include "auvctl/rl/env.hpp"
#include "auvctl/rl/td3.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace auvctl::rl {

/// Actor weights plus what is needed to run them: action scaling and the task layout.
struct PolicyBundle {
    Mlp actor;
    ActionScaling scaling;
    TaskKind task = TaskKind::Waypoint;
    ControlMode mode = ControlMode::Ideal;
    std::string label;

    int obs_width() const { return actor.input_width(); }
    Policy policy() const { return actor_policy(actor); }

    void save(const std::string& path) const;
    static PolicyBundle load(const std::string& path);
    void write(std::ostream& os) const;
    static PolicyBundle read(std::istream& is);
};

struct TrainConfig {
    Td3Config td3;
    long total_steps = 50'000;
    std::uint64_t seed = 0;
    /// Pause at the first episode boundary at or after this many steps (0 disables).
    long stop_after = 0;
    std::string checkpoint_path;  // written at every pause and at the end when set
    int updates_per_step = 1;

    void validate() const;
};

struct EpisodeLog {
    int episode = 0;
    long steps = 0;  // cumulative environment steps at episode end
    std::uint64_t seed = 0;
    double episode_return = 0.0;
    RewardVector components{};
    EpisodeMetrics metrics;
    int length = 0;
    bool terminal = false;
};

std::string train_log_header();
void write_train_log(std::ostream& os, const std::vector<EpisodeLog>& rows);

/// TD3 training over an Environment; every transition keeps its reward components so
/// the buffer can be re-scored under new weights.
class Trainer {
public:
    Trainer(EnvConfig env, TrainConfig cfg);

    /// Runs until the step budget or the stop_after pause point. Returns true when the budget is spent.
    bool run();
    bool finished() const { return steps_ >= cfg_.total_steps; }
    /// Raises the budget for a warm-started continuation.
    void extend(long extra_steps);

    /// Switches reward weights for subsequent episodes and re-scores the replay buffer.
    void set_weights(const RewardWeights& w);

    long steps() const { return steps_; }
    const std::vector<EpisodeLog>& log() const { return log_; }
    const Td3Agent& agent() const { return agent_; }
    const ReplayBuffer& replay() const { return replay_; }
    Environment& env() { return env_; }
    const TrainConfig& config() const { return cfg_; }
    TrainConfig& mutable_config() { return cfg_; }

    PolicyBundle current_policy() const;
    /// Actor snapshot with the highest episode return so far (current actor before any episode ends).
    PolicyBundle best_policy() const;

    void save_checkpoint(const std::string& path) const;
    static Trainer load_checkpoint(const std::string& path, EnvConfig env);

private:
    void run_episode();
    PolicyBundle bundle(const Mlp& actor) const;

    EnvConfig env_cfg_;
    TrainConfig cfg_;
    Environment env_;
    Td3Agent agent_;
    ReplayBuffer replay_;
    std::mt19937_64 explore_rng_, sample_rng_, noise_rng_;
    long steps_ = 0;
    int episode_ = 0;
    std::vector<EpisodeLog> log_;
    Mlp best_actor_;
    double best_return_ = -std::numeric_limits<double>::infinity();
};

struct EvalSummary {
    std::vector<EpisodeResult> episodes;
    double mean_return = 0.0;
    double std_return = 0.0;
    EpisodeMetrics mean_metrics;  // field-wise means; ssn holds the rounded mean
    double mean_ssn = 0.0;
    double std_ssn = 0.0;
    double std_dt = 0.0;
    double std_ec = 0.0;
};

/// Rolls out `policy` once per seed. Episodes are independent and may run in parallel.
EvalSummary evaluate(const EnvConfig& env, const Policy& policy, const std::vector<std::uint64_t>& seeds,
                     int threads = 1);

}  // namespace auvctl::rl
