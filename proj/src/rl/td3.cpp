#include "auvctl/rl/td3.hpp"

#include <istream>
#include <ostream>

namespace auvctl::rl {

void Td3Config::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidParams("discount must be in [0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidParams("tau must be in (0, 1]");
    if (policy_delay < 1) throw InvalidParams("policy delay must be >= 1");
    if (target_noise < 0.0 || noise_clip < 0.0 || exploration_noise < 0.0) throw InvalidParams("noise must be >= 0");
    if (batch_size < 1) throw InvalidParams("batch size must be >= 1");
    if (replay_capacity <= static_cast<std::size_t>(batch_size)) throw InvalidParams("replay capacity must exceed the batch size");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw InvalidParams("learning rates must be > 0");
    if (warmup_steps < 0 || max_episode_steps < 1) throw InvalidParams("bad warmup or episode length");
    if (hidden < 1) throw InvalidParams("hidden width must be >= 1");
}

Td3Agent::Td3Agent(int obs_width, int action_width, Td3Config cfg) : cfg_(cfg) {
    cfg_.validate();
    std::mt19937_64 init(mix_seed(cfg_.seed, 0x1417));
    const int h = cfg_.hidden;
    actor_ = Mlp({obs_width, h, h, action_width}, OutputActivation::Tanh, init);
    critic1_ = Mlp({obs_width + action_width, h, h, 1}, OutputActivation::Linear, init);
    critic2_ = Mlp({obs_width + action_width, h, h, 1}, OutputActivation::Linear, init);
    actor_t_ = actor_;
    critic1_t_ = critic1_;
    critic2_t_ = critic2_;
    actor_opt_ = Adam(actor_, cfg_.actor_lr);
    critic1_opt_ = Adam(critic1_, cfg_.critic_lr);
    critic2_opt_ = Adam(critic2_, cfg_.critic_lr);
}

Matrix Td3Agent::stack(const Matrix& obs, const Matrix& act) {
    Matrix x(obs.rows() + act.rows(), obs.cols());
    x.topRows(obs.rows()) = obs;
    x.bottomRows(act.rows()) = act;
    return x;
}

Vector Td3Agent::targets(const Batch& b, const Matrix& noise) const {
    Matrix a_next = actor_t_.forward(b.next_obs);
    a_next += noise.cwiseMax(-cfg_.noise_clip).cwiseMin(cfg_.noise_clip);
    a_next = a_next.cwiseMax(-1.0).cwiseMin(1.0);
    const Matrix x = stack(b.next_obs, a_next);
    const Matrix q1 = critic1_t_.forward(x), q2 = critic2_t_.forward(x);
    Vector y(b.reward.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = td3_target(b.reward(i), b.done(i), cfg_.gamma, q1(0, i), q2(0, i));
    return y;
}

LossReport Td3Agent::update(const Batch& b, std::mt19937_64& noise_rng) {
    const auto n = b.obs.cols();
    Matrix noise(action_width(), n);
    for (Eigen::Index i = 0; i < noise.size(); ++i)
        noise.data()[i] = std::normal_distribution<double>(0.0, cfg_.target_noise)(noise_rng);
    const Vector y = targets(b, noise);

    LossReport rep;
    const Matrix x = stack(b.obs, b.action);
    double loss_sum = 0.0;
    for (int k = 0; k < 2; ++k) {
        Mlp& q = k == 0 ? critic1_ : critic2_;
        Adam& opt = k == 0 ? critic1_opt_ : critic2_opt_;
        Mlp::Cache cache;
        const Matrix out = q.forward(x, cache);
        const Matrix err = out - y.transpose();
        const double loss = err.squaredNorm() / static_cast<double>(n);
        if (!std::isfinite(loss)) throw NonFiniteLoss("critic loss is not finite at update " + std::to_string(updates_));
        loss_sum += loss;
        if (k == 0) rep.mean_q = out.mean();
        MlpGrads g = q.zero_grads();
        q.backward(cache, 2.0 * err / static_cast<double>(n), g);
        opt.step(q, g);
    }
    rep.critic_loss = 0.5 * loss_sum;
    ++updates_;

    if (updates_ % cfg_.policy_delay == 0) {
        Mlp::Cache a_cache, q_cache;
        const Matrix a = actor_.forward(b.obs, a_cache);
        const Matrix q = critic1_.forward(stack(b.obs, a), q_cache);
        rep.actor_loss = -q.mean();
        if (!std::isfinite(rep.actor_loss)) throw NonFiniteLoss("actor loss is not finite at update " + std::to_string(updates_));
        MlpGrads qg = critic1_.zero_grads();
        const Matrix dx = critic1_.backward(q_cache, Matrix::Constant(1, n, -1.0 / static_cast<double>(n)), qg);
        MlpGrads ag = actor_.zero_grads();
        actor_.backward(a_cache, dx.bottomRows(action_width()), ag);
        actor_opt_.step(actor_, ag);
        soft_update_targets(cfg_.tau);
        rep.actor_updated = true;
    }
    return rep;
}

void Td3Agent::soft_update_targets(double tau) {
    actor_.soft_update_into(actor_t_, tau);
    critic1_.soft_update_into(critic1_t_, tau);
    critic2_.soft_update_into(critic2_t_, tau);
}

namespace {

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw IoError("truncated agent data");
    return v;
}

}  // namespace

void Td3Agent::write(std::ostream& os) const {
    put(os, cfg_.gamma);
    put(os, cfg_.tau);
    put<std::int32_t>(os, cfg_.policy_delay);
    put(os, cfg_.target_noise);
    put(os, cfg_.noise_clip);
    put(os, cfg_.exploration_noise);
    put<std::int32_t>(os, cfg_.batch_size);
    put<std::uint64_t>(os, cfg_.replay_capacity);
    put(os, cfg_.actor_lr);
    put(os, cfg_.critic_lr);
    put<std::int32_t>(os, cfg_.warmup_steps);
    put<std::int32_t>(os, cfg_.max_episode_steps);
    put<std::int32_t>(os, cfg_.hidden);
    put<std::uint64_t>(os, cfg_.seed);
    put<std::int64_t>(os, updates_);
    for (const Mlp* m : {&actor_, &critic1_, &critic2_, &actor_t_, &critic1_t_, &critic2_t_}) m->write(os);
    for (const Adam* a : {&actor_opt_, &critic1_opt_, &critic2_opt_}) a->write(os);
}

Td3Agent Td3Agent::read(std::istream& is) {
    Td3Agent a;
    a.cfg_.gamma = get<double>(is);
    a.cfg_.tau = get<double>(is);
    a.cfg_.policy_delay = get<std::int32_t>(is);
    a.cfg_.target_noise = get<double>(is);
    a.cfg_.noise_clip = get<double>(is);
    a.cfg_.exploration_noise = get<double>(is);
    a.cfg_.batch_size = get<std::int32_t>(is);
    a.cfg_.replay_capacity = get<std::uint64_t>(is);
    a.cfg_.actor_lr = get<double>(is);
    a.cfg_.critic_lr = get<double>(is);
    a.cfg_.warmup_steps = get<std::int32_t>(is);
    a.cfg_.max_episode_steps = get<std::int32_t>(is);
    a.cfg_.hidden = get<std::int32_t>(is);
    a.cfg_.seed = get<std::uint64_t>(is);
    a.cfg_.validate();
    a.updates_ = get<std::int64_t>(is);
    for (Mlp* m : {&a.actor_, &a.critic1_, &a.critic2_, &a.actor_t_, &a.critic1_t_, &a.critic2_t_}) *m = Mlp::read(is);
    for (Adam* o : {&a.actor_opt_, &a.critic1_opt_, &a.critic2_opt_}) *o = Adam::read(is);
    return a;
}

}  // namespace auvctl::rl
