#include "auvctl/llmopt/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <sstream>

namespace auvctl::llm {

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

std::string weights_text(const rl::RewardWeights& w, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < w.names.size(); ++i)
        s += (i ? sep : "") + w.names[i] + "=" + fmt("%.6g", w.values[i]);
    return s;
}

std::string record_line(const IterationRecord& r, const IterationRecord* prev) {
    const auto& c = r.params.controller;
    std::string s = fmt("#%d zeta_yaw=%.4g/%.4g zeta_pitch=%.4g/%.4g lambda=[", r.iteration, c.yaw_ss.zeta1,
                        c.yaw_ss.zeta2, c.pitch_ss.zeta1, c.pitch_ss.zeta2);
    s += weights_text(r.params.weights, ",") + "]";
    s += fmt(" -> ssn=%.3g ec=%.4g dt=%.4g col=%.3g", r.digest.ssn, r.digest.ec, r.digest.dt, r.digest.collisions);
    if (r.tracking) s += fmt(" settle_yaw=%.3g os_yaw=%.3g rms=%.4g", r.tracking->yaw.settling_time,
                             r.tracking->yaw.overshoot_pct, r.tracking->tracking_rms);
    s += fmt(" U=%.4g", r.utility);
    if (prev) {
        s += fmt(" (dssn=%+.3g ddt=%+.4g", r.digest.ssn - prev->digest.ssn, r.digest.dt - prev->digest.dt);
        if (r.tracking && prev->tracking)
            s += fmt(" dsettle_yaw=%+.3g", r.tracking->yaw.settling_time - prev->tracking->yaw.settling_time);
        s += fmt(" dU=%+.4g)", r.utility - prev->utility);
    }
    return s;
}

std::string channel_text(const char* name, const ChannelSummary& c, const char* unit, double unit_scale) {
    return fmt("%s: overshoot %.2f%%, settling %.2f s, steady-state error %.4g %s, oscillations %d, lag %.2f s, "
               "saturation %.1f%%, rms %.4g %s",
               name, c.overshoot_pct, c.settling_time, c.steady_state_error * unit_scale, unit, c.oscillations, c.lag,
               100.0 * c.saturation_fraction, c.rms_error * unit_scale, unit);
}

std::string channel_kv(const char* p, const ChannelSummary& c) {
    return fmt(" %s_overshoot=%.6g %s_settling=%.6g %s_sse=%.6g %s_oscillations=%d %s_lag=%.6g %s_saturation=%.6g", p,
               c.overshoot_pct, p, c.settling_time, p, c.steady_state_error, p, c.oscillations, p, c.lag, p,
               c.saturation_fraction);
}

}  // namespace

double surrogate_utility(const LogDigest& d, const std::optional<TrackingSummary>& t, const UtilityWeights& w) {
    return w.ssn * d.ssn - w.ec * d.ec - w.dt * d.dt - w.collision * d.collisions -
           (t ? w.tracking * t->tracking_rms : 0.0);
}

std::string memory_summarize(const std::vector<IterationRecord>& history, int cap) {
    if (history.empty()) throw InvalidParams("memory_summarize needs a nonempty history");
    if (cap < 0) throw InvalidParams("digest cap must be >= 0");
    const std::size_t n = history.size();
    const std::size_t keep = std::min(n, static_cast<std::size_t>(cap));
    const std::size_t older = n - keep;
    std::string out;
    if (older > 0) {
        std::size_t best = 0, worst = 0;
        for (std::size_t i = 1; i < older; ++i) {
            if (history[i].utility > history[best].utility) best = i;
            if (history[i].utility < history[worst].utility) worst = i;
        }
        const auto line = [&](std::size_t i) { return record_line(history[i], i ? &history[i - 1] : nullptr); };
        if (older == 1) {
            out += "earlier " + line(0) + "\n";
        } else {
            out += "best earlier " + line(best) + "\n";
            out += "worst earlier " + line(worst) + "\n";
        }
    }
    for (std::size_t i = older; i < n; ++i) out += record_line(history[i], i ? &history[i - 1] : nullptr) + "\n";
    return out;
}

bool tracking_breached(const TrackingSummary& t, const BottleneckThresholds& th) {
    for (const ChannelSummary* c : {&t.yaw, &t.depth})
        if (c->overshoot_pct > th.overshoot_pct || c->settling_time > th.settling_time ||
            c->oscillations > th.oscillations || c->saturation_fraction > th.saturation_fraction)
            return true;
    return false;
}

Target select_bottleneck(const IterationRecord& latest, const std::vector<IterationRecord>& earlier,
                         const BottleneckThresholds& th) {
    const bool controller = latest.tracking && tracking_breached(*latest.tracking, th);
    bool regressed = false;
    if (!earlier.empty()) {
        const auto best = std::max_element(earlier.begin(), earlier.end(),
                                           [](const auto& a, const auto& b) { return a.utility < b.utility; });
        regressed = latest.digest.ssn < best->digest.ssn || latest.digest.dt > best->digest.dt;
    }
    if (controller && regressed) return Target::Both;
    if (controller) return Target::Controller;
    return Target::Reward;
}

void PromptContext::validate() const {
    if (max_chars < 2048) throw InvalidParams("prompt max_chars must be >= 2048");
    if (digest_cap < 0) throw InvalidParams("digest_cap must be >= 0");
}

std::string build_prompt(const PromptContext& ctx, const IterationRecord& latest,
                         const std::vector<IterationRecord>& earlier, const std::optional<std::string>& memory_digest) {
    ctx.validate();
    const auto& c = latest.params.controller;
    const bool phase1 = latest.phase == 1;

    std::string head = fmt("# AUV reward and controller tuning: iteration %d, phase %d (%s)\n\n", latest.iteration,
                           latest.phase,
                           phase1 ? "preliminary reward tuning in ideal mode" : "joint reward and controller tuning");
    std::string body;
    body += "## Guidelines\n" + ctx.guidelines + "\n\n";
    body += "## Environment\n" + ctx.environment + "\n\n";
    body += "## User requirements\n" + ctx.requirements + "\n\n";
    body += "## Safety constraints and task priorities\n" + ctx.safety + "\n\n";

    std::string params = "## Current parameters\n";
    params += "Reward weights (lambda): " + weights_text(latest.params.weights, " ") + "\n";
    params += fmt("Controller: %s\n", to_string(c.kind).c_str());
    params += fmt("S-surface yaw: zeta1=%.6g zeta2=%.6g\n", c.yaw_ss.zeta1, c.yaw_ss.zeta2);
    params += fmt("S-surface pitch: zeta1=%.6g zeta2=%.6g\n", c.pitch_ss.zeta1, c.pitch_ss.zeta2);
    params += "zeta1 scales the tracking error like a proportional gain: larger values respond faster and harder. "
              "zeta2 scales the error rate like a derivative gain: larger values add damping and suppress overshoot "
              "and oscillation but slow the response.\n\n";

    const auto& d = latest.digest;
    std::string metrics = "## Latest metrics\n";
    metrics += fmt("Episodes %d, mean return %.6g, served nodes %.4g, mean power %.5g W, danger time %.5g s, "
                   "collisions %.4g, utility %.6g\n",
                   d.episodes, d.mean_return, d.ssn, d.ec, d.dt, d.collisions, latest.utility);
    metrics += "Mean reward component sums:";
    for (std::size_t i = 0; i < d.component_sums.size(); ++i)
        metrics += " " + kRewardComponentNames[i] + "=" + fmt("%.6g", d.component_sums[i]);
    metrics += "\n";
    metrics += fmt("STATE iteration=%d phase=%d suggested=%s ssn=%.6g ec=%.6g dt=%.6g collisions=%.6g utility=%.6g\n\n",
                   latest.iteration, latest.phase, to_string(latest.suggested).c_str(), d.ssn, d.ec, d.dt,
                   d.collisions, latest.utility);

    std::string tracking = "## Tracking on the fixed reference probe\n";
    if (latest.tracking) {
        const auto& t = *latest.tracking;
        tracking += channel_text("Yaw", t.yaw, "deg", 180.0 / kPi) + "\n";
        tracking += channel_text("Depth", t.depth, "m", 1.0) + "\n";
        tracking += "TRACKING" + channel_kv("yaw", t.yaw) + channel_kv("depth", t.depth) +
                    fmt(" rms=%.6g", t.tracking_rms) + "\n";
        tracking += fmt("Thresholds: overshoot %.4g%%, settling %.4g s, oscillations %d, saturation %.4g.\n\n",
                        ctx.thresholds.overshoot_pct, ctx.thresholds.settling_time, ctx.thresholds.oscillations,
                        ctx.thresholds.saturation_fraction);
    } else {
        tracking += "No probe in this phase (ideal mode bypasses the controllers).\n\n";
    }

    std::string target = "## Suggested target\n" + to_string(latest.suggested) + "\n\n";

    std::string schema = "## Output format\nReply with exactly one fenced block:\n```adjustment\n"
                         "target = reward | controller | both\n"
                         "zeta1_yaw_factor = <multiplier in [0.2, 5]>\n"
                         "zeta2_yaw_factor = <multiplier in [0.2, 5]>\n"
                         "zeta1_pitch_factor = <multiplier in [0.2, 5]>\n"
                         "zeta2_pitch_factor = <multiplier in [0.2, 5]>\n"
                         "lambda_<component>_delta = <additive change; weights stay >= 0>\n"
                         "terminate = true | false\n"
                         "rationale = <one line>\n```\nOmitted keys mean no change.";
    if (phase1) schema += " Only lambda changes are applied in this phase.";
    schema += "\n";

    const auto assemble = [&](const std::string& memory) {
        return head + body + params + metrics + tracking + "## Memory\n" + memory + "\n" + target + schema;
    };

    std::string memory;
    if (earlier.empty()) {
        memory = std::string(kFirstIterationMarker) + ".\n";
    } else if (memory_digest) {
        memory = *memory_digest + "\n";
    } else {
        for (int cap = ctx.digest_cap; cap >= 0; --cap) {
            memory = memory_summarize(earlier, cap);
            if (assemble(memory).size() <= ctx.max_chars) break;
        }
    }
    std::string prompt = assemble(memory);
    if (prompt.size() > ctx.max_chars) prompt = assemble("(history omitted to fit the prompt budget)\n");
    if (prompt.size() > ctx.max_chars) {
        // Oversized free-text context: cut the middle and keep the output schema intact.
        const std::size_t room = ctx.max_chars - schema.size() - 1;
        prompt = prompt.substr(0, room) + "\n" + schema;
    }
    return prompt;
}

std::string build_memory_prompt(const std::vector<IterationRecord>& history, int cap) {
    return "Summarize how the parameter changes below affected performance. Keep it under 15 lines, one finding "
           "per line, and name the best parameter set seen so far.\n\n" +
           memory_summarize(history, cap);
}

std::map<std::string, std::string> parse_tagged_line(const std::string& prompt, const std::string& tag) {
    std::istringstream in(prompt);
    std::string line;
    std::map<std::string, std::string> out;
    while (std::getline(in, line)) {
        if (line.rfind(tag + " ", 0) != 0) continue;
        std::istringstream words(line.substr(tag.size() + 1));
        std::string w;
        while (words >> w) {
            const auto eq = w.find('=');
            if (eq != std::string::npos) out[w.substr(0, eq)] = w.substr(eq + 1);
        }
        break;
    }
    return out;
}

}  // namespace auvctl::llm
