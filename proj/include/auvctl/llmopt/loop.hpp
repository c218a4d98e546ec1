#pragma once

#include "auvctl/llmopt/client.hpp"
#include "auvctl/rl/train.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace auvctl::llm {

struct EvalOutcome {
    LogDigest digest;
    std::optional<TrackingSummary> tracking;
};

/// Produces the evidence for one iteration: phase 1 runs in Ideal mode without a probe,
/// phase 2 under the target sea with the tracking probe.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual EvalOutcome evaluate(const OptParams& params, int phase, int iteration) = 0;
};

LogDigest digest_of(const rl::EvalSummary& s);

struct SimEvaluatorConfig {
    rl::EnvConfig env;            // target task, controller kind and sea for phase 2
    rl::TrainConfig train;        // initial training budget
    long retrain_steps = 5'000;   // warm-started continuation per iteration
    std::vector<std::uint64_t> eval_seeds{101, 102, 103};
    int threads = 1;
    ProbeConfig probe;            // sea and wave seed are taken from `env`
    std::uint64_t reference_seed = 7;
    double reference_duration = 120.0;
    /// Evaluate this fixed policy instead of training (retrain_steps is then ignored).
    std::optional<rl::Policy> fixed_policy;
};

/// Warm-started TD3 trainer plus evaluation rollouts and the fixed-reference probe.
class SimEvaluator : public Evaluator {
public:
    explicit SimEvaluator(SimEvaluatorConfig cfg);
    EvalOutcome evaluate(const OptParams& params, int phase, int iteration) override;
    const ReferenceSeries& reference() const { return reference_; }
    rl::Trainer* trainer() { return trainer_.get(); }
    /// Probe result of the latest phase-2 evaluation.
    const std::optional<ProbeResult>& last_probe() const { return last_probe_; }

private:
    SimEvaluatorConfig cfg_;
    ReferenceSeries reference_;
    std::unique_ptr<rl::Trainer> trainer_;
    std::optional<ProbeResult> last_probe_;
};

struct LoopConfig {
    int budget = 5;             // total iterations over both phases
    int phase1_iterations = 1;  // leading reward-only iterations in Ideal mode
    int malformed_retries = 2;  // extra attempts after a malformed response
    double stagnation_tol = 0.01;
    int stagnation_patience = 2;
    UtilityWeights utility;
    PromptContext prompt;
    std::string archive_dir;  // prompts and responses are written here when set

    void validate() const;
};

enum class StopReason { Terminated, Budget, Stagnation, Aborted };
std::string to_string(StopReason r);

struct LoopResult {
    OptParams final_params;  // after the last applied adjustment
    OptParams best_params;   // evaluated parameters with the highest utility
    std::vector<IterationRecord> records;
    std::vector<std::string> prompts;
    std::vector<std::string> responses;
    StopReason reason = StopReason::Budget;
};

/// Evaluate, summarize, prompt, parse, apply and record until the client terminates, the
/// budget is spent or utility stagnates. Repeated malformed responses abort the loop and
/// return the best parameters so far in `final_params`.
LoopResult run_optimization_loop(const OptParams& initial, LlmClient& client, Evaluator& evaluator,
                                 const LoopConfig& cfg, LlmClient* memory_client = nullptr);

nlohmann::json to_json(const IterationRecord& r);
nlohmann::json to_json(const OptParams& p);
OptParams opt_params_from_json(const nlohmann::json& j, OptParams base = {});

}  // namespace auvctl::llm
