#pragma once

#include "auvctl/llmopt/loop.hpp"
#include "auvctl/probe.hpp"
#include "auvctl/rl/train.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace auvctl {

struct LlmSettings {
    std::string client = "rule";  // rule | fixture | http
    std::string fixtures_dir;
    bool memory_client = false;  // second client instance condenses the history
    llm::LoopConfig loop;
    long retrain_steps = 5'000;
    std::vector<std::uint64_t> eval_seeds{101, 102, 103};
    std::uint64_t reference_seed = 7;
    double reference_duration = 120.0;
};

/// Everything a run needs. Parsing is strict: unknown keys are rejected with their path.
struct RunConfig {
    std::string vehicle = "remus100";
    rl::EnvConfig env;
    rl::TrainConfig train;
    LlmSettings llm;
    ProbeConfig probe;
    std::vector<std::uint64_t> seeds{1};
    std::string output_dir = "runs/default";
    std::string policy;  // optional policy bundle path
    int threads = 1;

    void validate() const;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    /// Canonical form with every field present.
    nlohmann::json to_json() const;
    /// FNV-1a 64 of the canonical dump, as 16 hex digits.
    std::string hash() const;
};

std::string fnv1a_hex(const std::string& bytes);

}  // namespace auvctl
