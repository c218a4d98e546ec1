#pragma once

#include "auvctl/control.hpp"
#include "auvctl/rl/replay.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace auvctl::llm {

enum class Target { Reward, Controller, Both };
std::string to_string(Target t);
Target target_from_string(const std::string& s);

inline constexpr double kMinFactor = 0.2;
inline constexpr double kMaxFactor = 5.0;

/// Order of the multiplicative factors in ParameterAdjustment::zeta_factors.
inline const std::array<std::string, 4> kZetaKeys{"zeta1_yaw", "zeta2_yaw", "zeta1_pitch", "zeta2_pitch"};

/// Quantities the optimization loop tunes.
struct OptParams {
    rl::RewardWeights weights = rl::RewardWeights::defaults();
    ControllerConfig controller;

    double zeta(std::size_t i) const;
    void set_zeta(std::size_t i, double v);
};

struct ParameterAdjustment {
    Target target = Target::Both;
    std::array<double, 4> zeta_factors{1.0, 1.0, 1.0, 1.0};
    std::map<std::string, double> lambda_deltas;
    bool terminate = false;
    std::string rationale;
    std::vector<std::string> warnings;  // clamps applied while parsing or applying

    bool identity() const;
};

/// Parses the single ```adjustment fenced block of `key = value` lines. Accepted keys:
/// target, <zeta key>_factor, lambda_<component>_delta, terminate, rationale.
/// Factors are clamped to [kMinFactor, kMaxFactor] with a warning.
ParameterAdjustment parse_adjustment(const std::string& response);

/// Applies the parts selected by `adj.target`; weights are floored at zero (with a warning
/// appended to `adj.warnings`).
OptParams apply_adjustment(const OptParams& p, ParameterAdjustment& adj);

/// Canonical text form of an adjustment as a fenced block; parse_adjustment round-trips it.
std::string format_adjustment(const ParameterAdjustment& adj);

}  // namespace auvctl::llm
