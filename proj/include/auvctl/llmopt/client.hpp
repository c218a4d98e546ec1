#pragma once

#include "auvctl/llmopt/prompt.hpp"

#include <string>
#include <vector>

namespace auvctl::llm {

/// Synchronous text-in, text-out model interface.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// Raises LlmClientError when no response could be obtained.
    virtual std::string send(const std::string& prompt, const std::vector<std::string>& attachments = {}) = 0;
    virtual std::string name() const = 0;

    double timeout_s = 60.0;
    int retries = 2;
};

/// Replays responses in order; from a directory the files are taken in lexicographic name order.
class FixtureClient : public LlmClient {
public:
    explicit FixtureClient(std::vector<std::string> responses);
    static FixtureClient from_directory(const std::string& dir);

    std::string send(const std::string& prompt, const std::vector<std::string>& attachments = {}) override;
    std::string name() const override { return "fixture"; }
    std::size_t calls() const { return next_; }

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

struct RuleBasedConfig {
    double settling_target = 4.0;   // s; raise zeta1 above this
    double overshoot_target = 10.0; // %; raise zeta2 above this
    int oscillation_limit = 10;     // raise zeta2 and lower zeta1 above this
    double zeta1_step = 2.0;
    double zeta2_step = 1.5;
    double seabed_delta = 0.5;
    double collision_delta = 5.0;
};

/// Scripted expert reading the machine-readable lines of the prompt: slow settling raises zeta1,
/// oscillation raises zeta2 and lowers zeta1, overshoot raises zeta2; danger time raises the
/// seabed weight and collisions the collision weight. Terminates in the joint phase when
/// nothing needs changing.
class RuleBasedClient : public LlmClient {
public:
    explicit RuleBasedClient(RuleBasedConfig cfg = {}) : cfg_(cfg) {}
    std::string send(const std::string& prompt, const std::vector<std::string>& attachments = {}) override;
    std::string name() const override { return "rule-based"; }

private:
    RuleBasedConfig cfg_;
};

struct HttpClientConfig {
    std::string endpoint;  // full URL of a chat-completions route
    std::string api_key;
    std::string model;
    double temperature = 0.5;
    double top_p = 1.0;
    double timeout_s = 60.0;
    int retries = 2;

    /// Reads AUVCTL_LLM_ENDPOINT, AUVCTL_LLM_API_KEY and AUVCTL_LLM_MODEL. ConfigError when unset.
    static HttpClientConfig from_env();
};

/// Chat-completion style HTTP client: one user message per request.
class HttpClient : public LlmClient {
public:
    explicit HttpClient(HttpClientConfig cfg);
    std::string send(const std::string& prompt, const std::vector<std::string>& attachments = {}) override;
    std::string name() const override { return "http:" + cfg_.model; }

    /// Request body for a prompt; exposed for inspection.
    std::string request_body(const std::string& prompt, const std::vector<std::string>& attachments) const;
    /// Extracts choices[0].message.content from a response body.
    static std::string extract_content(const std::string& body);

private:
    HttpClientConfig cfg_;
};

}  // namespace auvctl::llm
