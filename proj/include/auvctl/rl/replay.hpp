#pragma once

#include "auvctl/rl/mlp.hpp"
#include "auvctl/tasks.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace auvctl::rl {

/// Nonnegative weights over the reward components, one per name.
struct RewardWeights {
    std::vector<std::string> names;
    std::vector<double> values;

    void validate() const;
    double get(const std::string& name) const;
    void set(const std::string& name, double v);
    /// Defaults over the fixed component set.
    static RewardWeights defaults();
    static RewardWeights zeros();
};

double compute_reward(std::span<const double> components, const RewardWeights& w);
inline double compute_reward(const RewardVector& c, const RewardWeights& w) {
    return compute_reward(std::span<const double>(c.data(), c.size()), w);
}

struct Transition {
    Vector obs;
    Vector action;  // normalized, each entry in [-1, 1]
    double reward = 0.0;
    RewardVector components{};
    Vector next_obs;
    bool done = false;
};

struct Batch {
    Matrix obs, action, next_obs;
    Vector reward, done;
};

/// Ring buffer over flat storage that grows up to `capacity`.
class ReplayBuffer {
public:
    ReplayBuffer(int obs_width, int action_width, std::size_t capacity);

    void push(const Transition& t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    int obs_width() const { return obs_w_; }
    int action_width() const { return act_w_; }

    Transition at(std::size_t i) const;
    double reward(std::size_t i) const { return reward_[i]; }
    RewardVector components(std::size_t i) const;

    /// Recomputes every stored scalar reward from its components under new weights.
    void reweight(const RewardWeights& w);

    Batch sample(std::size_t n, std::mt19937_64& rng) const;

    void write(std::ostream& os) const;
    static ReplayBuffer read(std::istream& is);

private:
    int obs_w_, act_w_;
    std::size_t capacity_;
    std::size_t size_ = 0, head_ = 0;
    std::vector<double> obs_, act_, next_, reward_, comp_, done_;
};

}  // namespace auvctl::rl
