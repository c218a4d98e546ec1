#pragma once

#include "auvctl/rl/mlp.hpp"
#include "auvctl/rl/replay.hpp"

#include <iosfwd>

namespace auvctl::rl {

struct Td3Config {
    double gamma = 0.99;
    double tau = 0.005;
    int policy_delay = 2;
    double target_noise = 0.2;
    double noise_clip = 0.5;
    double exploration_noise = 0.1;
    int batch_size = 256;
    std::size_t replay_capacity = 1'000'000;
    double actor_lr = 3e-4;
    double critic_lr = 3e-4;
    int warmup_steps = 10'000;
    int max_episode_steps = 12'000;
    int hidden = 128;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LossReport {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    bool actor_updated = false;
    double mean_q = 0.0;
};

/// Clipped double-Q bootstrap target for one transition.
inline double td3_target(double reward, double done, double gamma, double q1_next, double q2_next) {
    return reward + gamma * (1.0 - done) * std::min(q1_next, q2_next);
}

class Td3Agent {
public:
    Td3Agent(int obs_width, int action_width, Td3Config cfg);

    const Td3Config& config() const { return cfg_; }
    int obs_width() const { return actor_.input_width(); }
    int action_width() const { return actor_.output_width(); }

    /// Deterministic normalized action in (-1, 1).
    Vector act(const Vector& obs) const { return actor_.forward(obs); }

    /// One critic step (and a delayed actor + target step). `noise_rng` draws target noise.
    LossReport update(const Batch& batch, std::mt19937_64& noise_rng);
    /// Bootstrap targets y for a batch, using the target networks and clipped smoothing noise.
    Vector targets(const Batch& batch, const Matrix& noise) const;

    const Mlp& actor() const { return actor_; }
    const Mlp& critic1() const { return critic1_; }
    const Mlp& critic2() const { return critic2_; }
    const Mlp& actor_target() const { return actor_t_; }
    const Mlp& critic1_target() const { return critic1_t_; }
    const Mlp& critic2_target() const { return critic2_t_; }
    Mlp& actor() { return actor_; }
    Mlp& critic1() { return critic1_; }
    Mlp& critic2() { return critic2_; }
    long updates() const { return updates_; }

    void soft_update_targets(double tau);

    void write(std::ostream& os) const;
    static Td3Agent read(std::istream& is);

private:
    Td3Agent() = default;
    static Matrix stack(const Matrix& obs, const Matrix& act);

    Td3Config cfg_;
    Mlp actor_, critic1_, critic2_, actor_t_, critic1_t_, critic2_t_;
    Adam actor_opt_, critic1_opt_, critic2_opt_;
    long updates_ = 0;
};

}  // namespace auvctl::rl
