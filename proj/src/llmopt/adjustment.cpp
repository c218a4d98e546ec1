#include "auvctl/llmopt/adjustment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace auvctl::llm {

std::string to_string(Target t) {
    switch (t) {
        case Target::Reward: return "reward";
        case Target::Controller: return "controller";
        case Target::Both: return "both";
    }
    return "both";
}

Target target_from_string(const std::string& s) {
    if (s == "reward") return Target::Reward;
    if (s == "controller") return Target::Controller;
    if (s == "both") return Target::Both;
    throw MalformedResponse("unknown target '" + s + "' (expected reward, controller or both)");
}

double OptParams::zeta(std::size_t i) const {
    switch (i) {
        case 0: return controller.yaw_ss.zeta1;
        case 1: return controller.yaw_ss.zeta2;
        case 2: return controller.pitch_ss.zeta1;
        case 3: return controller.pitch_ss.zeta2;
    }
    throw DomainError("zeta index out of range");
}

void OptParams::set_zeta(std::size_t i, double v) {
    switch (i) {
        case 0: controller.yaw_ss.zeta1 = v; return;
        case 1: controller.yaw_ss.zeta2 = v; return;
        case 2: controller.pitch_ss.zeta1 = v; return;
        case 3: controller.pitch_ss.zeta2 = v; return;
    }
    throw DomainError("zeta index out of range");
}

bool ParameterAdjustment::identity() const {
    return std::all_of(zeta_factors.begin(), zeta_factors.end(), [](double f) { return f == 1.0; }) &&
           std::all_of(lambda_deltas.begin(), lambda_deltas.end(), [](const auto& kv) { return kv.second == 0.0; });
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || ptr != end || !std::isfinite(out))
        throw MalformedResponse("value of '" + key + "' is not a finite number: '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw MalformedResponse("value of '" + key + "' is not a boolean: '" + v + "'");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

ParameterAdjustment parse_adjustment(const std::string& response) {
    std::istringstream in(response);
    std::string line;
    std::vector<std::vector<std::string>> blocks;
    bool inside = false, tagged = false;
    std::vector<std::string> current;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.rfind("```", 0) != 0) {
            if (inside) current.push_back(t);
            continue;
        }
        if (!inside) {
            inside = true;
            tagged = trim(t.substr(3)) == "adjustment";
            current.clear();
        } else {
            inside = false;
            if (tagged) blocks.push_back(current);
        }
    }
    if (inside) throw MalformedResponse("unterminated fenced block");
    if (blocks.empty()) throw MalformedResponse("no ```adjustment block found");
    if (blocks.size() > 1) throw MalformedResponse(std::to_string(blocks.size()) + " adjustment blocks found; expected one");

    ParameterAdjustment adj;
    std::set<std::string> seen;
    bool has_target = false, has_zeta = false, has_lambda = false;
    const auto& names = kRewardComponentNames;
    for (const std::string& l : blocks.front()) {
        if (l.empty() || l[0] == '#') continue;
        const auto eq = l.find('=');
        if (eq == std::string::npos) throw MalformedResponse("line is not 'key = value': '" + l + "'");
        const std::string key = trim(l.substr(0, eq));
        const std::string value = trim(l.substr(eq + 1));
        if (!seen.insert(key).second) throw MalformedResponse("duplicate key '" + key + "'");

        if (key == "target") {
            adj.target = target_from_string(value);
            has_target = true;
        } else if (key == "terminate") {
            adj.terminate = parse_bool(key, value);
        } else if (key == "rationale") {
            adj.rationale = value;
        } else if (const auto z = std::find(kZetaKeys.begin(), kZetaKeys.end(),
                                            key.size() > 7 && key.ends_with("_factor") ? key.substr(0, key.size() - 7)
                                                                                       : std::string());
                   z != kZetaKeys.end()) {
            double f = parse_number(key, value);
            const double c = std::clamp(f, kMinFactor, kMaxFactor);
            if (c != f) adj.warnings.push_back("clamped " + key + " from " + fmt(f) + " to " + fmt(c));
            adj.zeta_factors[static_cast<std::size_t>(z - kZetaKeys.begin())] = c;
            has_zeta = true;
        } else if (key.starts_with("lambda_") && key.ends_with("_delta") && key.size() > 13) {
            const std::string name = key.substr(7, key.size() - 13);
            if (std::find(names.begin(), names.end(), name) == names.end())
                throw MalformedResponse("unknown reward component in '" + key + "'");
            adj.lambda_deltas[name] = parse_number(key, value);
            has_lambda = true;
        } else {
            throw MalformedResponse("unknown key '" + key + "'");
        }
    }
    if (!has_target) adj.target = has_zeta && !has_lambda ? Target::Controller
                                  : has_lambda && !has_zeta ? Target::Reward
                                                            : Target::Both;
    return adj;
}

OptParams apply_adjustment(const OptParams& p, ParameterAdjustment& adj) {
    OptParams out = p;
    if (adj.target != Target::Reward)
        for (std::size_t i = 0; i < kZetaKeys.size(); ++i) {
            const double f = std::clamp(adj.zeta_factors[i], kMinFactor, kMaxFactor);
            out.set_zeta(i, p.zeta(i) * f);
        }
    if (adj.target != Target::Controller)
        for (const auto& [name, delta] : adj.lambda_deltas) {
            const double v = out.weights.get(name) + delta;
            if (v < 0.0) adj.warnings.push_back("floored lambda " + name + " at 0 (requested " + fmt(v) + ")");
            out.weights.set(name, std::max(0.0, v));
        }
    out.controller.validate();
    out.weights.validate();
    return out;
}

std::string format_adjustment(const ParameterAdjustment& adj) {
    std::string s = "```adjustment\ntarget = " + to_string(adj.target) + "\n";
    for (std::size_t i = 0; i < kZetaKeys.size(); ++i)
        if (adj.zeta_factors[i] != 1.0) s += kZetaKeys[i] + "_factor = " + fmt(adj.zeta_factors[i]) + "\n";
    for (const auto& [name, delta] : adj.lambda_deltas) s += "lambda_" + name + "_delta = " + fmt(delta) + "\n";
    s += std::string("terminate = ") + (adj.terminate ? "true" : "false") + "\n";
    if (!adj.rationale.empty()) s += "rationale = " + adj.rationale + "\n";
    return s + "```\n";
}

}  // namespace auvctl::llm
