#include "auvctl/llmopt/client.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace auvctl::llm {

FixtureClient::FixtureClient(std::vector<std::string> responses) : responses_(std::move(responses)) {}

FixtureClient FixtureClient::from_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("fixture directory not found: " + dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("fixture directory is empty: " + dir);
    std::vector<std::string> out;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw IoError("cannot read fixture " + f.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        out.push_back(ss.str());
    }
    return FixtureClient(std::move(out));
}

std::string FixtureClient::send(const std::string&, const std::vector<std::string>&) {
    if (next_ >= responses_.size())
        throw LlmClientError("fixture responses exhausted after " + std::to_string(responses_.size()) + " calls");
    return responses_[next_++];
}

namespace {

double num(const std::map<std::string, std::string>& kv, const std::string& key, double fallback = 0.0) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : std::stod(it->second);
}

}  // namespace

std::string RuleBasedClient::send(const std::string& prompt, const std::vector<std::string>&) {
    const auto state = parse_tagged_line(prompt, "STATE");
    if (state.empty()) throw LlmClientError("rule-based client: prompt has no STATE line");
    const auto tracking = parse_tagged_line(prompt, "TRACKING");
    const bool joint = num(state, "phase", 1.0) > 1.0;

    ParameterAdjustment adj;
    std::vector<std::string> why;
    bool controller = false, reward = false;
    if (joint && !tracking.empty()) {
        const auto channel = [&](const std::string& ch, std::size_t z1, std::size_t z2) {
            if (num(tracking, ch + "_oscillations") > cfg_.oscillation_limit) {
                adj.zeta_factors[z2] = cfg_.zeta2_step;
                adj.zeta_factors[z1] = 1.0 / cfg_.zeta2_step;
                why.push_back(ch + " oscillates");
            } else if (num(tracking, ch + "_overshoot") > cfg_.overshoot_target) {
                adj.zeta_factors[z2] = cfg_.zeta2_step;
                why.push_back(ch + " overshoots");
            } else if (num(tracking, ch + "_settling") > cfg_.settling_target) {
                adj.zeta_factors[z1] = cfg_.zeta1_step;
                why.push_back(ch + " settles slowly");
            } else {
                return;
            }
            controller = true;
        };
        channel("yaw", 0, 1);
        channel("depth", 2, 3);
    }
    if (num(state, "collisions") > 0.0) {
        adj.lambda_deltas["collision"] = cfg_.collision_delta;
        why.push_back("collisions occurred");
        reward = true;
    }
    if (num(state, "dt") > 0.0) {
        adj.lambda_deltas["seabed"] = cfg_.seabed_delta;
        why.push_back("danger time is nonzero");
        reward = true;
    }
    adj.target = controller && reward ? Target::Both : controller ? Target::Controller : Target::Reward;
    adj.terminate = joint && !controller && !reward;
    if (why.empty()) why.push_back(joint ? "all criteria met" : "no reward change needed");
    for (std::size_t i = 0; i < why.size(); ++i) adj.rationale += (i ? "; " : "") + why[i];
    return "Assessment follows.\n\n" + format_adjustment(adj);
}

HttpClientConfig HttpClientConfig::from_env() {
    const auto get = [](const char* name) {
        const char* v = std::getenv(name);
        if (!v || !*v) throw ConfigError(std::string("environment variable ") + name + " is not set");
        return std::string(v);
    };
    HttpClientConfig c;
    c.endpoint = get("AUVCTL_LLM_ENDPOINT");
    c.api_key = get("AUVCTL_LLM_API_KEY");
    c.model = get("AUVCTL_LLM_MODEL");
    return c;
}

}  // namespace auvctl::llm
