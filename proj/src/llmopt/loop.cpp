#include "auvctl/llmopt/loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace auvctl::llm {

LogDigest digest_of(const rl::EvalSummary& s) {
    LogDigest d;
    d.episodes = static_cast<int>(s.episodes.size());
    d.mean_return = s.mean_return;
    d.ssn = s.mean_ssn;
    d.ec = s.mean_metrics.ec;
    d.dt = s.mean_metrics.dt;
    double col = 0.0;
    for (const auto& e : s.episodes) {
        col += e.metrics.collisions;
        for (std::size_t i = 0; i < d.component_sums.size(); ++i) d.component_sums[i] += e.component_sums[i];
    }
    if (d.episodes > 0) {
        d.collisions = col / d.episodes;
        for (double& c : d.component_sums) c /= d.episodes;
    }
    return d;
}

SimEvaluator::SimEvaluator(SimEvaluatorConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.env.validate();
    if (!cfg_.fixed_policy) cfg_.train.validate();
    if (cfg_.retrain_steps < 0) throw InvalidParams("retrain_steps must be >= 0");
    if (cfg_.eval_seeds.empty()) throw InvalidParams("evaluation needs at least one seed");
    reference_ = record_tracking_reference(cfg_.reference_seed, cfg_.reference_duration);
}

EvalOutcome SimEvaluator::evaluate(const OptParams& params, int phase, int) {
    rl::EnvConfig env = cfg_.env;
    env.mode = phase == 1 ? rl::ControlMode::Ideal : cfg_.env.mode;
    env.weights = params.weights;
    env.controller = params.controller;

    rl::Policy policy;
    if (cfg_.fixed_policy) {
        policy = *cfg_.fixed_policy;
    } else {
        if (!trainer_) {
            trainer_ = std::make_unique<rl::Trainer>(env, cfg_.train);
        } else {
            trainer_->env().mutable_config() = env;
            trainer_->set_weights(params.weights);
            trainer_->extend(cfg_.retrain_steps);
        }
        trainer_->run();
        policy = trainer_->current_policy().policy();
    }

    EvalOutcome out;
    out.digest = digest_of(rl::evaluate(env, policy, cfg_.eval_seeds, cfg_.threads));
    last_probe_.reset();
    if (phase > 1) {
        ProbeConfig pc = cfg_.probe;
        pc.sea = env.sea;
        pc.spectrum = env.spectrum;
        last_probe_ = reference_probe(params.controller, pc, reference_);
        out.tracking = summarize_tracking(*last_probe_);
    }
    return out;
}

void LoopConfig::validate() const {
    if (budget < 1) throw InvalidParams("optimization budget must be >= 1 (got " + std::to_string(budget) + ")");
    if (phase1_iterations < 0) throw InvalidParams("phase1_iterations must be >= 0");
    if (malformed_retries < 0) throw InvalidParams("malformed_retries must be >= 0");
    if (stagnation_patience < 1) throw InvalidParams("stagnation_patience must be >= 1");
    prompt.validate();
}

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::Terminated: return "terminated";
        case StopReason::Budget: return "budget";
        case StopReason::Stagnation: return "stagnation";
        case StopReason::Aborted: return "aborted";
    }
    return "budget";
}

namespace {

class Archive {
public:
    explicit Archive(const std::string& dir) : dir_(dir) {
        if (!dir_.empty()) std::filesystem::create_directories(dir_);
    }
    void write(const std::string& name, const std::string& text) const {
        if (dir_.empty()) return;
        const auto path = std::filesystem::path(dir_) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << text;
    }

private:
    std::string dir_;
};

std::string tag(const char* kind, int it, int attempt = -1) {
    char buf[64];
    if (attempt < 0) std::snprintf(buf, sizeof buf, "iter_%03d_%s.txt", it, kind);
    else std::snprintf(buf, sizeof buf, "iter_%03d_%s_%d.txt", it, kind, attempt);
    return buf;
}

}  // namespace

LoopResult run_optimization_loop(const OptParams& initial, LlmClient& client, Evaluator& evaluator,
                                 const LoopConfig& cfg, LlmClient* memory_client) {
    cfg.validate();
    initial.controller.validate();
    initial.weights.validate();
    const Archive archive(cfg.archive_dir);

    LoopResult res;
    res.final_params = res.best_params = initial;
    res.reason = StopReason::Budget;
    OptParams params = initial;
    double best_utility = -std::numeric_limits<double>::infinity();
    int stagnant = 0;

    for (int it = 1; it <= cfg.budget; ++it) {
        IterationRecord rec;
        rec.iteration = it;
        rec.phase = it <= cfg.phase1_iterations ? 1 : 2;
        rec.params = params;
        const EvalOutcome ev = evaluator.evaluate(params, rec.phase, it);
        rec.digest = ev.digest;
        rec.tracking = ev.tracking;
        rec.utility = surrogate_utility(rec.digest, rec.tracking, cfg.utility);
        rec.suggested = rec.phase == 1 ? Target::Reward : select_bottleneck(rec, res.records, cfg.prompt.thresholds);
        if (rec.utility > best_utility) {
            best_utility = rec.utility;
            res.best_params = params;
        }

        if (!res.records.empty() && res.records.back().phase == rec.phase) {
            const double prev = res.records.back().utility;
            const double gain = (rec.utility - prev) / std::max(std::abs(prev), 1.0);
            stagnant = gain < cfg.stagnation_tol ? stagnant + 1 : 0;
        } else {
            stagnant = 0;
        }
        if (stagnant >= cfg.stagnation_patience) {
            res.records.push_back(rec);
            res.reason = StopReason::Stagnation;
            break;
        }

        std::optional<std::string> memory;
        if (memory_client && !res.records.empty()) {
            const std::string mp = build_memory_prompt(res.records, cfg.prompt.digest_cap);
            archive.write(tag("memory_prompt", it), mp);
            memory = memory_client->send(mp);
            archive.write(tag("memory_response", it), *memory);
        }
        const std::string prompt = build_prompt(cfg.prompt, rec, res.records, memory);
        archive.write(tag("prompt", it), prompt);
        res.prompts.push_back(prompt);

        std::optional<ParameterAdjustment> adj;
        for (int attempt = 0; attempt <= cfg.malformed_retries && !adj; ++attempt) {
            const std::string response = client.send(prompt);
            archive.write(tag("response", it, attempt), response);
            res.responses.push_back(response);
            try {
                adj = parse_adjustment(response);
            } catch (const MalformedResponse& e) {
                archive.write(tag("parse_error", it, attempt), e.what());
            }
        }
        if (!adj) {
            rec.aborted = true;
            res.records.push_back(rec);
            res.reason = StopReason::Aborted;
            res.final_params = res.best_params;
            return res;
        }

        if (rec.phase == 1 && adj->target != Target::Reward) {
            if (std::any_of(adj->zeta_factors.begin(), adj->zeta_factors.end(), [](double f) { return f != 1.0; }))
                adj->warnings.push_back("controller factors ignored in the reward-only phase");
            adj->target = Target::Reward;
        }
        params = apply_adjustment(params, *adj);
        rec.adjustment = *adj;
        rec.terminated = adj->terminate;
        res.records.push_back(rec);
        if (adj->terminate) {
            res.reason = StopReason::Terminated;
            break;
        }
    }
    if (res.reason != StopReason::Aborted) res.final_params = params;
    return res;
}

namespace {

nlohmann::json channel_json(const ChannelSummary& c) {
    return {{"overshoot_pct", c.overshoot_pct},
            {"settling_time", c.settling_time},
            {"steady_state_error", c.steady_state_error},
            {"oscillations", c.oscillations},
            {"lag", c.lag},
            {"saturation_fraction", c.saturation_fraction},
            {"rms_error", c.rms_error}};
}

SSurfaceParams ss_from_json(const nlohmann::json& j, SSurfaceParams base) {
    for (const auto& [k, v] : j.items()) {
        if (k == "zeta1") base.zeta1 = v.get<double>();
        else if (k == "zeta2") base.zeta2 = v.get<double>();
        else if (k == "delta_u_gain") base.delta_u_gain = v.get<double>();
        else if (k == "output_scale") base.output_scale = v.get<double>();
        else throw ConfigError("unknown S-surface key '" + k + "'");
    }
    return base;
}

}  // namespace

nlohmann::json to_json(const OptParams& p) {
    nlohmann::json w = nlohmann::json::object();
    for (std::size_t i = 0; i < p.weights.names.size(); ++i) w[p.weights.names[i]] = p.weights.values[i];
    const auto ss = [](const SSurfaceParams& s) {
        return nlohmann::json{{"zeta1", s.zeta1}, {"zeta2", s.zeta2}, {"delta_u_gain", s.delta_u_gain},
                              {"output_scale", s.output_scale}};
    };
    return {{"weights", w}, {"yaw_ss", ss(p.controller.yaw_ss)}, {"pitch_ss", ss(p.controller.pitch_ss)}};
}

OptParams opt_params_from_json(const nlohmann::json& j, OptParams base) {
    for (const auto& [k, v] : j.items()) {
        if (k == "weights") {
            for (const auto& [name, value] : v.items()) base.weights.set(name, value.get<double>());
        } else if (k == "yaw_ss") {
            base.controller.yaw_ss = ss_from_json(v, base.controller.yaw_ss);
        } else if (k == "pitch_ss") {
            base.controller.pitch_ss = ss_from_json(v, base.controller.pitch_ss);
        } else {
            throw ConfigError("unknown parameter key '" + k + "'");
        }
    }
    base.controller.validate();
    base.weights.validate();
    return base;
}

nlohmann::json to_json(const IterationRecord& r) {
    nlohmann::json comps = nlohmann::json::object();
    for (std::size_t i = 0; i < r.digest.component_sums.size(); ++i)
        comps[kRewardComponentNames[i]] = r.digest.component_sums[i];
    nlohmann::json j = {{"iteration", r.iteration},
                        {"phase", r.phase},
                        {"params", to_json(r.params)},
                        {"digest",
                         {{"mean_return", r.digest.mean_return},
                          {"component_sums", comps},
                          {"ssn", r.digest.ssn},
                          {"ec", r.digest.ec},
                          {"dt", r.digest.dt},
                          {"collisions", r.digest.collisions},
                          {"episodes", r.digest.episodes}}},
                        {"utility", r.utility},
                        {"suggested", to_string(r.suggested)},
                        {"terminated", r.terminated},
                        {"aborted", r.aborted}};
    if (r.tracking)
        j["tracking"] = {{"yaw", channel_json(r.tracking->yaw)},
                         {"depth", channel_json(r.tracking->depth)},
                         {"tracking_rms", r.tracking->tracking_rms}};
    const auto& a = r.adjustment;
    j["adjustment"] = {{"target", to_string(a.target)},
                       {"zeta_factors", a.zeta_factors},
                       {"lambda_deltas", a.lambda_deltas},
                       {"terminate", a.terminate},
                       {"rationale", a.rationale},
                       {"warnings", a.warnings}};
    return j;
}

}  // namespace auvctl::llm
