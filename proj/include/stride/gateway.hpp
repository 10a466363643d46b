#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "stride/domain.hpp"

namespace stride {

enum class Role { planner, supervisor, extractor, reasoner, fallback, fact_selector };

std::string to_string(Role r);
Role role_from_string(const std::string& s);

struct ChatRequest {
    Role role_tag = Role::planner;
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 1.0;
    int max_tokens = 512;
};

struct ChatResponse {
    std::string text;
    TokenUsage token_usage;
    bool truncated = false;  // hit max_tokens; not an error
};

struct ProviderUnavailable : Error {
    using Error::Error;
};
struct ScriptParseError : Error {
    using Error::Error;
};

// A model provider. Implementations must be safe for concurrent complete()
// calls.
class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    // True when a failure is worth retrying (transport-level trouble).
    virtual bool retryable() const { return false; }
};

// Deterministic canned provider: matches requests by role and ordered
// substring matchers over the user prompt; first matching rule wins.
class ScriptedProvider : public Provider {
public:
    struct Rule {
        Role role_tag = Role::planner;
        std::vector<std::string> match;
        std::string response;
    };

    explicit ScriptedProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}

    ChatResponse complete(const ChatRequest& request) override;

    const std::vector<Rule>& rules() const { return rules_; }

private:
    std::vector<Rule> rules_;
};

// Loads a scripted provider from a JSONL file of
// {role_tag, match: [substrings], response} records.
std::shared_ptr<ScriptedProvider> load_script(const std::filesystem::path& path);

void save_script(const std::vector<ScriptedProvider::Rule>& rules, const std::filesystem::path& path);

struct HttpProviderConfig {
    std::string base_url;  // e.g. https://api.example.com/v1
    std::string api_key;
    std::string model;
    int timeout_seconds = 60;
};

// Reads STRIDE_API_BASE / STRIDE_API_KEY / STRIDE_MODEL.
HttpProviderConfig http_config_from_env();

// Chat-completion client against any OpenAI-compatible endpoint.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {}
    ChatResponse complete(const ChatRequest& request) override;
    bool retryable() const override { return true; }

    // Embedding endpoint for the real-embedding retrieval mode.
    std::vector<double> embed(const std::string& text);

private:
    HttpProviderConfig config_;
};

struct GatewayConfig {
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{500};
    int in_flight_limit = 4;
    double temperature = 1.0;
    int max_tokens = 512;
    bool sleep_on_retry = true;  // tests disable to keep fast
};

struct UsageSnapshot {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    long long calls = 0;
    long long calls_by_role[6] = {0, 0, 0, 0, 0, 0};
};

// Front door for every model call: bounds in-flight concurrency, retries
// transient failures with exponential backoff, and accumulates usage.
class Gateway {
public:
    Gateway(std::shared_ptr<Provider> provider, GatewayConfig config = {});
    ~Gateway();

    ChatResponse complete(ChatRequest request);

    // Fills role defaults (temperature / max_tokens) then completes.
    ChatResponse complete(Role role, const std::string& system_prompt, const std::string& user_prompt);

    UsageSnapshot usage() const;
    const GatewayConfig& config() const { return config_; }

private:
    std::shared_ptr<Provider> provider_;
    GatewayConfig config_;
    mutable std::mutex mutex_;
    UsageSnapshot usage_;
    std::unique_ptr<class Semaphore> slots_;
};

// Whitespace token count; the scripted provider uses it so that usage
// accounting stays deterministic without a real tokenizer.
long long approx_token_count(const std::string& text);

}  // namespace stride
