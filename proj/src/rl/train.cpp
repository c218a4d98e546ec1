#include "auvctl/rl/train.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace auvctl::rl {

namespace {

constexpr char kPolicyMagic[8] = {'A', 'U', 'V', 'P', 'O', 'L', '0', '1'};
constexpr char kCheckpointMagic[8] = {'A', 'U', 'V', 'C', 'K', 'P', '0', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw IoError("truncated data");
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put<std::uint64_t>(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    const auto n = get<std::uint64_t>(is);
    if (n > (1ULL << 30)) throw IoError("bad string length");
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw IoError("truncated data");
    return s;
}

template <class Rng>
std::string rng_text(const Rng& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

template <class Rng>
void rng_restore(Rng& r, const std::string& s) {
    std::istringstream is(s);
    is >> r;
    if (!is) throw IoError("bad generator state in checkpoint");
}

void check_magic(std::istream& is, const char (&magic)[8], const std::string& what) {
    char m[8];
    is.read(m, 8);
    if (!is || !std::equal(m, m + 8, magic)) throw IoError("not a " + what + " file");
}

}  // namespace

void PolicyBundle::write(std::ostream& os) const {
    os.write(kPolicyMagic, 8);
    nlohmann::json meta = {{"task", to_string(task)},
                           {"mode", to_string(mode)},
                           {"label", label},
                           {"theta_max", scaling.theta_max},
                           {"yaw_rate_max", scaling.yaw_rate_max},
                           {"rpm_max", scaling.rpm_max},
                           {"layers", actor.widths()}};
    put_string(os, meta.dump());
    actor.write(os);
}

PolicyBundle PolicyBundle::read(std::istream& is) {
    check_magic(is, kPolicyMagic, "policy bundle");
    PolicyBundle b;
    try {
        const auto meta = nlohmann::json::parse(get_string(is));
        b.task = task_kind_from_string(meta.at("task").get<std::string>());
        b.mode = control_mode_from_string(meta.at("mode").get<std::string>());
        b.label = meta.at("label").get<std::string>();
        b.scaling.theta_max = meta.at("theta_max").get<double>();
        b.scaling.yaw_rate_max = meta.at("yaw_rate_max").get<double>();
        b.scaling.rpm_max = meta.at("rpm_max").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad policy metadata: ") + e.what());
    }
    b.actor = Mlp::read(is);
    if (b.actor.output_width() != Environment::action_width() || b.actor.output_activation() != OutputActivation::Tanh)
        throw IoError("policy network does not emit bounded 3-wide actions");
    return b;
}

void PolicyBundle::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write policy file '" + path + "'");
    write(f);
    if (!f) throw IoError("failed writing policy file '" + path + "'");
}

PolicyBundle PolicyBundle::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open policy file '" + path + "'");
    return read(f);
}

void TrainConfig::validate() const {
    td3.validate();
    if (total_steps < 1) throw InvalidParams("training needs at least one step");
    if (stop_after < 0) throw InvalidParams("stop_after must be >= 0");
    if (updates_per_step < 1) throw InvalidParams("updates per step must be >= 1");
}

std::string train_log_header() {
    std::string h = "episode,steps,seed,return";
    for (const auto& n : kRewardComponentNames) h += "," + n;
    return h + ",ssn,ec,dt,collisions,tracking_rms,length,terminal";
}

void write_train_log(std::ostream& os, const std::vector<EpisodeLog>& rows) {
    os << train_log_header() << '\n';
    char buf[64];
    for (const auto& r : rows) {
        os << r.episode << ',' << r.steps << ',' << r.seed;
        std::snprintf(buf, sizeof buf, ",%.10g", r.episode_return);
        os << buf;
        for (double c : r.components) {
            std::snprintf(buf, sizeof buf, ",%.10g", c);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, ",%d,%.10g,%.10g,%d,%.10g,%d,%d", r.metrics.ssn, r.metrics.ec, r.metrics.dt,
                      r.metrics.collisions, r.metrics.tracking_rms, r.length, r.terminal ? 1 : 0);
        os << buf << '\n';
    }
}

Trainer::Trainer(EnvConfig env, TrainConfig cfg)
    : env_cfg_(env),
      cfg_([&] {
          cfg.validate();
          return cfg;
      }()),
      env_(std::move(env)),
      agent_(env_.obs_width(), Environment::action_width(), [&] {
          Td3Config t = cfg_.td3;
          t.seed = cfg_.seed;
          return t;
      }()),
      replay_(env_.obs_width(), Environment::action_width(), cfg_.td3.replay_capacity),
      explore_rng_(mix_seed(cfg_.seed, 0xe1)),
      sample_rng_(mix_seed(cfg_.seed, 0xe2)),
      noise_rng_(mix_seed(cfg_.seed, 0xe3)),
      best_actor_(agent_.actor()) {}

void Trainer::extend(long extra_steps) {
    if (extra_steps < 0) throw InvalidParams("cannot shrink the step budget");
    cfg_.total_steps += extra_steps;
}

void Trainer::set_weights(const RewardWeights& w) {
    w.validate();
    if (w.values.size() != kRewardComponentCount) throw LengthMismatch("reward weights length");
    env_cfg_.weights = w;
    env_.mutable_config().weights = w;
    replay_.reweight(w);
}

void Trainer::run_episode() {
    const std::uint64_t seed = mix_seed(cfg_.seed, 0xe900 + static_cast<std::uint64_t>(episode_));
    std::vector<Observation> obs = env_.reset(seed);
    const auto n = obs.size();
    EpisodeLog row;
    row.episode = episode_;
    row.seed = seed;
    std::vector<Vector> actions(n);
    const auto& td3 = cfg_.td3;
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) {
            if (steps_ < td3.warmup_steps) {
                std::uniform_real_distribution<double> u(-1.0, 1.0);
                actions[i] = Vector::NullaryExpr(3, [&] { return u(explore_rng_); });
            } else {
                Vector a = agent_.act(obs[i].values);
                for (Eigen::Index k = 0; k < a.size(); ++k)
                    a(k) += std::normal_distribution<double>(0.0, td3.exploration_noise)(explore_rng_);
                actions[i] = a.cwiseMax(-1.0).cwiseMin(1.0);
            }
        }
        StepResult st = env_.step(actions);
        ++steps_;
        ++row.length;
        const bool cut = row.length >= td3.max_episode_steps;
        for (std::size_t i = 0; i < n; ++i) {
            Transition t;
            t.obs = obs[i].values;
            t.action = actions[i];
            t.components = st.components[i];
            t.reward = st.rewards[i];
            t.next_obs = st.obs[i].values;
            t.done = st.terminal;
            replay_.push(t);
            row.episode_return += st.rewards[i];
            for (int c = 0; c < kRewardComponentCount; ++c) row.components[c] += st.components[i][c];
        }
        if (steps_ >= td3.warmup_steps && replay_.size() >= static_cast<std::size_t>(td3.batch_size)) {
            for (int u = 0; u < cfg_.updates_per_step; ++u)
                agent_.update(replay_.sample(static_cast<std::size_t>(td3.batch_size), sample_rng_), noise_rng_);
        }
        obs = std::move(st.obs);
        if (st.done() || cut || steps_ >= cfg_.total_steps) {
            row.terminal = st.terminal;
            break;
        }
    }
    row.steps = steps_;
    row.metrics = env_.metrics();
    if (row.episode_return > best_return_) {
        best_return_ = row.episode_return;
        best_actor_ = agent_.actor();
    }
    log_.push_back(row);
    ++episode_;
}

bool Trainer::run() {
    while (!finished()) {
        run_episode();
        if (cfg_.stop_after > 0 && steps_ >= cfg_.stop_after && !finished()) {
            if (!cfg_.checkpoint_path.empty()) save_checkpoint(cfg_.checkpoint_path);
            return false;
        }
    }
    if (!cfg_.checkpoint_path.empty()) save_checkpoint(cfg_.checkpoint_path);
    return true;
}

PolicyBundle Trainer::bundle(const Mlp& actor) const {
    PolicyBundle b;
    b.actor = actor;
    b.scaling = env_cfg_.scaling;
    b.task = env_cfg_.scenario.kind;
    b.mode = env_cfg_.mode;
    b.label = "td3 seed " + std::to_string(cfg_.seed) + " step " + std::to_string(steps_);
    return b;
}

PolicyBundle Trainer::current_policy() const { return bundle(agent_.actor()); }
PolicyBundle Trainer::best_policy() const { return bundle(best_actor_); }

void Trainer::save_checkpoint(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw IoError("cannot write checkpoint '" + tmp + "'");
        f.write(kCheckpointMagic, 8);
        put<std::int64_t>(f, cfg_.total_steps);
        put<std::uint64_t>(f, cfg_.seed);
        put<std::int64_t>(f, cfg_.stop_after);
        put<std::int32_t>(f, cfg_.updates_per_step);
        put_string(f, cfg_.checkpoint_path);
        put<std::int64_t>(f, steps_);
        put<std::int32_t>(f, episode_);
        put(f, best_return_);
        for (double w : env_cfg_.weights.values) put(f, w);
        for (const auto* r : {&explore_rng_, &sample_rng_, &noise_rng_}) put_string(f, rng_text(*r));
        agent_.write(f);
        replay_.write(f);
        best_actor_.write(f);
        put<std::uint64_t>(f, log_.size());
        for (const auto& r : log_) {
            put<std::int32_t>(f, r.episode);
            put<std::int64_t>(f, r.steps);
            put<std::uint64_t>(f, r.seed);
            put(f, r.episode_return);
            for (double c : r.components) put(f, c);
            put<std::int32_t>(f, r.metrics.ssn);
            put(f, r.metrics.ec);
            put(f, r.metrics.dt);
            put<std::int32_t>(f, r.metrics.collisions);
            put(f, r.metrics.tracking_rms);
            put(f, r.metrics.duration);
            put(f, r.metrics.energy);
            put<std::int32_t>(f, r.length);
            put<std::uint8_t>(f, r.terminal ? 1 : 0);
        }
        if (!f) throw IoError("failed writing checkpoint '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot move checkpoint into '" + path + "'");
}

Trainer Trainer::load_checkpoint(const std::string& path, EnvConfig env) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint '" + path + "'");
    check_magic(f, kCheckpointMagic, "training checkpoint");
    TrainConfig cfg;
    cfg.total_steps = get<std::int64_t>(f);
    cfg.seed = get<std::uint64_t>(f);
    cfg.stop_after = get<std::int64_t>(f);
    cfg.updates_per_step = get<std::int32_t>(f);
    cfg.checkpoint_path = get_string(f);
    const auto steps = get<std::int64_t>(f);
    const auto episode = get<std::int32_t>(f);
    const auto best_return = get<double>(f);
    for (double& w : env.weights.values) w = get<double>(f);
    std::string rngs[3];
    for (auto& s : rngs) s = get_string(f);
    Td3Agent agent = Td3Agent::read(f);
    cfg.td3 = agent.config();

    Trainer t(std::move(env), cfg);
    t.agent_ = std::move(agent);
    t.replay_ = ReplayBuffer::read(f);
    if (t.replay_.obs_width() != t.env_.obs_width()) throw WidthMismatch("checkpoint observation width differs from the environment");
    t.best_actor_ = Mlp::read(f);
    t.steps_ = steps;
    t.episode_ = episode;
    t.best_return_ = best_return;
    rng_restore(t.explore_rng_, rngs[0]);
    rng_restore(t.sample_rng_, rngs[1]);
    rng_restore(t.noise_rng_, rngs[2]);
    const auto rows = get<std::uint64_t>(f);
    if (rows > (1ULL << 32)) throw IoError("bad log length in checkpoint");
    for (std::uint64_t k = 0; k < rows; ++k) {
        EpisodeLog r;
        r.episode = get<std::int32_t>(f);
        r.steps = get<std::int64_t>(f);
        r.seed = get<std::uint64_t>(f);
        r.episode_return = get<double>(f);
        for (double& c : r.components) c = get<double>(f);
        r.metrics.ssn = get<std::int32_t>(f);
        r.metrics.ec = get<double>(f);
        r.metrics.dt = get<double>(f);
        r.metrics.collisions = get<std::int32_t>(f);
        r.metrics.tracking_rms = get<double>(f);
        r.metrics.duration = get<double>(f);
        r.metrics.energy = get<double>(f);
        r.length = get<std::int32_t>(f);
        r.terminal = get<std::uint8_t>(f) != 0;
        t.log_.push_back(r);
    }
    return t;
}

EvalSummary evaluate(const EnvConfig& env, const Policy& policy, const std::vector<std::uint64_t>& seeds, int threads) {
    EvalSummary s;
    s.episodes.resize(seeds.size());
    const auto worker = [&](std::size_t begin, std::size_t stride) {
        Environment e(env);
        for (std::size_t k = begin; k < seeds.size(); k += stride) s.episodes[k] = rollout(e, policy, seeds[k]);
    };
    const auto nt = static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(seeds.size()))));
    if (nt == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(nt);
        for (std::size_t t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                try {
                    worker(t, nt);
                } catch (...) {
                    errs[t] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }
    if (seeds.empty()) return s;
    const double n = static_cast<double>(seeds.size());
    auto mean_std = [&](auto field, double& mean, double& sd) {
        mean = 0.0;
        for (const auto& e : s.episodes) mean += field(e) / n;
        double v = 0.0;
        for (const auto& e : s.episodes) v += (field(e) - mean) * (field(e) - mean);
        sd = seeds.size() > 1 ? std::sqrt(v / (n - 1.0)) : 0.0;
    };
    double unused;
    mean_std([](const EpisodeResult& e) { return e.episode_return; }, s.mean_return, s.std_return);
    mean_std([](const EpisodeResult& e) { return static_cast<double>(e.metrics.ssn); }, s.mean_ssn, s.std_ssn);
    mean_std([](const EpisodeResult& e) { return e.metrics.dt; }, s.mean_metrics.dt, s.std_dt);
    mean_std([](const EpisodeResult& e) { return e.metrics.ec; }, s.mean_metrics.ec, s.std_ec);
    mean_std([](const EpisodeResult& e) { return e.metrics.tracking_rms; }, s.mean_metrics.tracking_rms, unused);
    mean_std([](const EpisodeResult& e) { return e.metrics.duration; }, s.mean_metrics.duration, unused);
    mean_std([](const EpisodeResult& e) { return e.metrics.energy; }, s.mean_metrics.energy, unused);
    double coll = 0.0;
    mean_std([](const EpisodeResult& e) { return static_cast<double>(e.metrics.collisions); }, coll, unused);
    s.mean_metrics.collisions = static_cast<int>(std::lround(coll));
    s.mean_metrics.ssn = static_cast<int>(std::lround(s.mean_ssn));
    return s;
}

}  // namespace auvctl::rl
