#include "auvctl/llmopt/client.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <regex>
#include <thread>

namespace auvctl::llm {

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ConfigError("LLM endpoint is not an http(s) URL: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

HttpClient::HttpClient(HttpClientConfig cfg) : cfg_(std::move(cfg)) {
    split_url(cfg_.endpoint);
    if (cfg_.model.empty()) throw ConfigError("LLM model name is empty");
    if (cfg_.retries < 0) throw ConfigError("LLM retries must be >= 0");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (cfg_.endpoint.starts_with("https://"))
        throw ConfigError("https endpoint requested but this build has no TLS support");
#endif
    timeout_s = cfg_.timeout_s;
    retries = cfg_.retries;
}

std::string HttpClient::request_body(const std::string& prompt, const std::vector<std::string>& attachments) const {
    std::string content = prompt;
    for (const auto& a : attachments) content += "\n\n" + a;
    nlohmann::json body = {{"model", cfg_.model},
                           {"temperature", cfg_.temperature},
                           {"top_p", cfg_.top_p},
                           {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};
    return body.dump();
}

std::string HttpClient::extract_content(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw LlmClientError(std::string("unexpected response body: ") + e.what());
    }
}

std::string HttpClient::send(const std::string& prompt, const std::vector<std::string>& attachments) {
    const Url url = split_url(cfg_.endpoint);
    httplib::Client cli(url.origin);
    const auto secs = std::chrono::duration<double>(cfg_.timeout_s);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    cli.set_bearer_token_auth(cfg_.api_key);
    const std::string body = request_body(prompt, attachments);
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::seconds(1 << std::min(attempt - 1, 4)));
        const auto res = cli.Post(url.path, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status / 100 != 2) {
            last_error = "HTTP status " + std::to_string(res->status);
            if (res->status / 100 == 4 && res->status != 429) break;
            continue;
        }
        return extract_content(res->body);
    }
    throw LlmClientError("request to " + cfg_.endpoint + " failed after " + std::to_string(cfg_.retries + 1) +
                         " attempts: " + last_error);
}

}  // namespace auvctl::llm
