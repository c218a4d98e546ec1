#pragma once

#include "auvctl/llmopt/adjustment.hpp"
#include "auvctl/llmopt/summary.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace auvctl::llm {

/// Evaluation means over the episodes of one round.
struct LogDigest {
    double mean_return = 0.0;
    RewardVector component_sums{};  // per-episode means
    double ssn = 0.0;
    double ec = 0.0;
    double dt = 0.0;
    double collisions = 0.0;
    int episodes = 0;
};

struct IterationRecord {
    int iteration = 1;
    int phase = 1;
    OptParams params;  // parameters that were evaluated
    LogDigest digest;
    std::optional<TrackingSummary> tracking;
    double utility = 0.0;
    Target suggested = Target::Reward;
    ParameterAdjustment adjustment;  // response parsed after evaluating `params`
    bool terminated = false;
    bool aborted = false;  // no parseable response within the retry budget
};

/// Loop-internal scalar score: weighted task metrics with hard-constraint penalties.
struct UtilityWeights {
    double ssn = 1.0;
    double ec = 0.01;
    double dt = 0.05;
    double collision = 5.0;
    double tracking = 0.1;
};

double surrogate_utility(const LogDigest& d, const std::optional<TrackingSummary>& t, const UtilityWeights& w = {});

/// One line per record with deltas against the chronologically previous record. When the
/// history is longer than `cap`, the older records collapse to their best and worst by utility.
std::string memory_summarize(const std::vector<IterationRecord>& history, int cap);

struct BottleneckThresholds {
    double overshoot_pct = 20.0;
    double settling_time = 10.0;
    int oscillations = 10;
    double saturation_fraction = 0.5;
};

bool tracking_breached(const TrackingSummary& t, const BottleneckThresholds& th = {});

/// Suggested target: controller when tracking breaches a threshold, reward when task metrics
/// regress against the best earlier record, both when both hold, reward otherwise.
Target select_bottleneck(const IterationRecord& latest, const std::vector<IterationRecord>& earlier,
                         const BottleneckThresholds& th = {});

struct PromptContext {
    std::string environment = "Single AUV in a 600 m x 600 m area with seabed terrain, wave-induced currents and "
                              "an ambient current. Control rate 20 Hz.";
    std::string requirements = "Serve as many sensor nodes as possible while keeping at least 10 m of seabed "
                               "clearance and low energy use.";
    std::string safety = "Never accept collisions. Danger time (clearance under 10 m) must not grow. "
                         "Priorities: safety, then served nodes, then energy.";
    std::string guidelines = "Change one thing at a time when possible. Prefer small reward changes. "
                             "Terminate when further changes are unlikely to help or the controller is at its limits.";
    std::size_t max_chars = 16000;
    int digest_cap = 10;
    BottleneckThresholds thresholds;

    void validate() const;
};

inline constexpr const char* kFirstIterationMarker = "iteration 1, no prior adjustments";

/// Deterministic prompt for `latest` given the earlier records. `memory_digest` replaces the
/// built-in digest when a separate memory client produced one. The result never exceeds
/// ctx.max_chars; the oldest digest lines are dropped first.
std::string build_prompt(const PromptContext& ctx, const IterationRecord& latest,
                         const std::vector<IterationRecord>& earlier,
                         const std::optional<std::string>& memory_digest = std::nullopt);

/// Request sent to a memory client to condense the history.
std::string build_memory_prompt(const std::vector<IterationRecord>& history, int cap);

/// Key/value pairs of the first machine-readable line starting with `tag` (build_prompt emits
/// "STATE" and, when a probe ran, "TRACKING"). Empty when the line is absent.
std::map<std::string, std::string> parse_tagged_line(const std::string& prompt, const std::string& tag);

}  // namespace auvctl::llm
