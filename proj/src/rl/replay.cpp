#include "auvctl/rl/replay.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace auvctl::rl {

void RewardWeights::validate() const {
    if (names.size() != values.size()) throw LengthMismatch("reward weight names and values differ in length");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParams("reward weights must be finite and >= 0");
}

double RewardWeights::get(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown reward component '" + name + "'");
    return values[static_cast<std::size_t>(it - names.begin())];
}

void RewardWeights::set(const std::string& name, double v) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown reward component '" + name + "'");
    values[static_cast<std::size_t>(it - names.begin())] = v;
}

RewardWeights RewardWeights::defaults() {
    RewardWeights w;
    w.names.assign(kRewardComponentNames.begin(), kRewardComponentNames.end());
    w.values = {1.0, 10.0, 20.0, 1.0, 0.02, 0.05};
    return w;
}

RewardWeights RewardWeights::zeros() {
    RewardWeights w = defaults();
    std::fill(w.values.begin(), w.values.end(), 0.0);
    return w;
}

double compute_reward(std::span<const double> c, const RewardWeights& w) {
    if (c.size() != w.values.size())
        throw LengthMismatch("reward has " + std::to_string(c.size()) + " components but " +
                             std::to_string(w.values.size()) + " weights");
    double r = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) r += w.values[i] * c[i];
    return r;
}

ReplayBuffer::ReplayBuffer(int obs_width, int action_width, std::size_t capacity)
    : obs_w_(obs_width), act_w_(action_width), capacity_(capacity) {
    if (obs_width < 1 || action_width < 1 || capacity < 1) throw InvalidParams("bad replay buffer shape");
}

void ReplayBuffer::push(const Transition& t) {
    if (t.obs.size() != obs_w_ || t.next_obs.size() != obs_w_) throw WidthMismatch("transition observation width");
    if (t.action.size() != act_w_) throw WidthMismatch("transition action width");
    const auto ow = static_cast<std::size_t>(obs_w_), aw = static_cast<std::size_t>(act_w_);
    const std::size_t cw = kRewardComponentCount;
    if (size_ < capacity_ && head_ == size_) {
        obs_.insert(obs_.end(), t.obs.data(), t.obs.data() + ow);
        next_.insert(next_.end(), t.next_obs.data(), t.next_obs.data() + ow);
        act_.insert(act_.end(), t.action.data(), t.action.data() + aw);
        comp_.insert(comp_.end(), t.components.begin(), t.components.end());
        reward_.push_back(t.reward);
        done_.push_back(t.done ? 1.0 : 0.0);
        ++size_;
    } else {
        std::copy_n(t.obs.data(), ow, obs_.begin() + static_cast<std::ptrdiff_t>(head_ * ow));
        std::copy_n(t.next_obs.data(), ow, next_.begin() + static_cast<std::ptrdiff_t>(head_ * ow));
        std::copy_n(t.action.data(), aw, act_.begin() + static_cast<std::ptrdiff_t>(head_ * aw));
        std::copy_n(t.components.begin(), cw, comp_.begin() + static_cast<std::ptrdiff_t>(head_ * cw));
        reward_[head_] = t.reward;
        done_[head_] = t.done ? 1.0 : 0.0;
    }
    head_ = (head_ + 1) % capacity_;
}

RewardVector ReplayBuffer::components(std::size_t i) const {
    RewardVector c{};
    std::copy_n(comp_.begin() + static_cast<std::ptrdiff_t>(i * kRewardComponentCount), kRewardComponentCount, c.begin());
    return c;
}

Transition ReplayBuffer::at(std::size_t i) const {
    if (i >= size_) throw DomainError("replay index out of range");
    const auto ow = static_cast<std::size_t>(obs_w_), aw = static_cast<std::size_t>(act_w_);
    Transition t;
    t.obs = Eigen::Map<const Vector>(obs_.data() + i * ow, obs_w_);
    t.next_obs = Eigen::Map<const Vector>(next_.data() + i * ow, obs_w_);
    t.action = Eigen::Map<const Vector>(act_.data() + i * aw, act_w_);
    t.reward = reward_[i];
    t.components = components(i);
    t.done = done_[i] != 0.0;
    return t;
}

void ReplayBuffer::reweight(const RewardWeights& w) {
    for (std::size_t i = 0; i < size_; ++i)
        reward_[i] = compute_reward(std::span<const double>(comp_.data() + i * kRewardComponentCount, kRewardComponentCount), w);
}

Batch ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
    if (size_ == 0) throw DomainError("cannot sample from an empty replay buffer");
    const auto ow = static_cast<std::size_t>(obs_w_), aw = static_cast<std::size_t>(act_w_);
    Batch b;
    b.obs.resize(obs_w_, static_cast<Eigen::Index>(n));
    b.next_obs.resize(obs_w_, static_cast<Eigen::Index>(n));
    b.action.resize(act_w_, static_cast<Eigen::Index>(n));
    b.reward.resize(static_cast<Eigen::Index>(n));
    b.done.resize(static_cast<Eigen::Index>(n));
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = pick(rng);
        const auto col = static_cast<Eigen::Index>(k);
        b.obs.col(col) = Eigen::Map<const Vector>(obs_.data() + i * ow, obs_w_);
        b.next_obs.col(col) = Eigen::Map<const Vector>(next_.data() + i * ow, obs_w_);
        b.action.col(col) = Eigen::Map<const Vector>(act_.data() + i * aw, act_w_);
        b.reward(col) = reward_[i];
        b.done(col) = done_[i];
    }
    return b;
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
    if (!is) throw IoError("truncated replay data");
    return v;
}

void put_vec(std::ostream& os, const std::vector<double>& v) {
    put<std::uint64_t>(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_vec(std::istream& is) {
    const auto n = get<std::uint64_t>(is);
    if (n > (1ULL << 34)) throw IoError("bad replay array length");
    std::vector<double> v(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw IoError("truncated replay data");
    return v;
}

}  // namespace

void ReplayBuffer::write(std::ostream& os) const {
    put<std::int32_t>(os, obs_w_);
    put<std::int32_t>(os, act_w_);
    put<std::uint64_t>(os, capacity_);
    put<std::uint64_t>(os, size_);
    put<std::uint64_t>(os, head_);
    for (const auto* v : {&obs_, &act_, &next_, &reward_, &comp_, &done_}) put_vec(os, *v);
}

ReplayBuffer ReplayBuffer::read(std::istream& is) {
    const auto ow = get<std::int32_t>(is), aw = get<std::int32_t>(is);
    ReplayBuffer b(ow, aw, get<std::uint64_t>(is));
    b.size_ = get<std::uint64_t>(is);
    b.head_ = get<std::uint64_t>(is);
    for (auto* v : {&b.obs_, &b.act_, &b.next_, &b.reward_, &b.comp_, &b.done_}) *v = get_vec(is);
    if (b.reward_.size() != b.size_ || b.obs_.size() != b.size_ * static_cast<std::size_t>(ow))
        throw IoError("replay arrays do not match the recorded size");
    return b;
}

}  // namespace auvctl::rl
