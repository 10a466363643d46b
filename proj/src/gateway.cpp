#include "stride/gateway.hpp"

#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "stride/json_io.hpp"

namespace stride {

std::string to_string(Role r) {
    switch (r) {
        case Role::planner: return "planner";
        case Role::supervisor: return "supervisor";
        case Role::extractor: return "extractor";
        case Role::reasoner: return "reasoner";
        case Role::fallback: return "fallback";
        case Role::fact_selector: return "fact_selector";
    }
    return "planner";
}

Role role_from_string(const std::string& s) {
    if (s == "planner") return Role::planner;
    if (s == "supervisor") return Role::supervisor;
    if (s == "extractor") return Role::extractor;
    if (s == "reasoner") return Role::reasoner;
    if (s == "fallback") return Role::fallback;
    if (s == "fact_selector") return Role::fact_selector;
    throw Error("unknown role: " + s);
}

long long approx_token_count(const std::string& text) {
    std::istringstream in(text);
    std::string t;
    long long n = 0;
    while (in >> t) ++n;
    return n;
}

ChatResponse ScriptedProvider::complete(const ChatRequest& request) {
    for (const auto& rule : rules_) {
        if (rule.role_tag != request.role_tag) continue;
        bool all = true;
        for (const auto& needle : rule.match) {
            if (request.user_prompt.find(needle) == std::string::npos) {
                all = false;
                break;
            }
        }
        if (!all) continue;
        ChatResponse resp;
        resp.text = rule.response;
        resp.token_usage.prompt = approx_token_count(request.system_prompt) + approx_token_count(request.user_prompt);
        resp.token_usage.completion = approx_token_count(rule.response);
        return resp;
    }
    throw ProviderUnavailable("no script rule matches " + to_string(request.role_tag) + " request");
}

std::shared_ptr<ScriptedProvider> load_script(const std::filesystem::path& path) {
    std::vector<ScriptedProvider::Rule> rules;
    std::vector<json> records;
    try {
        records = read_jsonl(path);
    } catch (const Error& e) {
        throw ScriptParseError(e.what());
    }
    size_t line = 0;
    for (const auto& j : records) {
        ++line;
        try {
            ScriptedProvider::Rule rule;
            rule.role_tag = role_from_string(j.at("role_tag").get<std::string>());
            rule.match = j.value("match", std::vector<std::string>{});
            rule.response = j.at("response").get<std::string>();
            rules.push_back(std::move(rule));
        } catch (const std::exception& e) {
            throw ScriptParseError(path.string() + ": record " + std::to_string(line) + ": " + e.what());
        }
    }
    return std::make_shared<ScriptedProvider>(std::move(rules));
}

void save_script(const std::vector<ScriptedProvider::Rule>& rules, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string());
    for (const auto& rule : rules) {
        json j{{"role_tag", to_string(rule.role_tag)}, {"match", rule.match}, {"response", rule.response}};
        out << j.dump() << "\n";
    }
}

HttpProviderConfig http_config_from_env() {
    HttpProviderConfig cfg;
    if (const char* v = std::getenv("STRIDE_API_BASE")) cfg.base_url = v;
    if (const char* v = std::getenv("STRIDE_API_KEY")) cfg.api_key = v;
    if (const char* v = std::getenv("STRIDE_MODEL")) cfg.model = v;
    return cfg;
}

// ----------------------------------------------------------------------------
// HttpProvider
// ----------------------------------------------------------------------------

namespace {

// Splits "http://host:port/prefix" into client target and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base) {
    auto scheme_end = base.find("://");
    size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = base.find('/', host_start);
    if (path_start == std::string::npos) return {base, ""};
    std::string prefix = base.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base.substr(0, path_start), prefix};
}

}  // namespace

}  // namespace stride

#include <httplib.h>

namespace stride {

ChatResponse HttpProvider::complete(const ChatRequest& request) {
    if (config_.base_url.empty()) throw ProviderUnavailable("STRIDE_API_BASE not configured");
    auto [origin, prefix] = split_base_url(config_.base_url);
    httplib::Client client(origin);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_connection_timeout(config_.timeout_seconds, 0);

    json body{{"model", config_.model},
              {"messages",
               json::array({json{{"role", "system"}, {"content", request.system_prompt}},
                            json{{"role", "user"}, {"content", request.user_prompt}}})},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(prefix + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw ProviderUnavailable("transport error: " + httplib::to_string(res.error()));
    if (res->status >= 500) throw ProviderUnavailable("server error " + std::to_string(res->status));
    if (res->status != 200) throw Error("provider rejected request: HTTP " + std::to_string(res->status) + " " + res->body);

    try {
        json j = json::parse(res->body);
        ChatResponse out;
        const auto& choice = j.at("choices").at(0);
        out.text = choice.at("message").at("content").get<std::string>();
        out.truncated = choice.value("finish_reason", "") == "length";
        if (j.contains("usage")) {
            out.token_usage.prompt = j["usage"].value("prompt_tokens", 0LL);
            out.token_usage.completion = j["usage"].value("completion_tokens", 0LL);
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed provider response: ") + e.what());
    }
}

std::vector<double> HttpProvider::embed(const std::string& text) {
    if (config_.base_url.empty()) throw ProviderUnavailable("STRIDE_API_BASE not configured");
    auto [origin, prefix] = split_base_url(config_.base_url);
    httplib::Client client(origin);
    client.set_read_timeout(config_.timeout_seconds, 0);

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    json body{{"model", config_.model}, {"input", text}};
    auto res = client.Post(prefix + "/embeddings", headers, body.dump(), "application/json");
    if (!res) throw ProviderUnavailable("transport error: " + httplib::to_string(res.error()));
    if (res->status != 200) throw ProviderUnavailable("embedding endpoint error " + std::to_string(res->status));
    json j = json::parse(res->body);
    return j.at("data").at(0).at("embedding").get<std::vector<double>>();
}

// ----------------------------------------------------------------------------
// Gateway
// ----------------------------------------------------------------------------

class Semaphore {
public:
    explicit Semaphore(int slots) : slots_(slots) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return slots_ > 0; });
        --slots_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++slots_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int slots_;
};

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayConfig config)
    : provider_(std::move(provider)),
      config_(config),
      slots_(std::make_unique<Semaphore>(config.in_flight_limit > 0 ? config.in_flight_limit : 1)) {}

Gateway::~Gateway() = default;

ChatResponse Gateway::complete(ChatRequest request) {
    if (request.temperature < 0) throw Error("temperature must be >= 0");
    if (request.max_tokens <= 0) throw Error("max_tokens must be > 0");

    slots_->acquire();
    struct Releaser {
        Semaphore* s;
        ~Releaser() { s->release(); }
    } releaser{slots_.get()};

    const int attempts = provider_->retryable() ? std::max(1, config_.max_attempts) : 1;
    for (int attempt = 0;; ++attempt) {
        try {
            ChatResponse resp = provider_->complete(request);
            std::lock_guard lock(mutex_);
            usage_.prompt_tokens += resp.token_usage.prompt;
            usage_.completion_tokens += resp.token_usage.completion;
            usage_.calls += 1;
            usage_.calls_by_role[static_cast<int>(request.role_tag)] += 1;
            return resp;
        } catch (const ProviderUnavailable&) {
            if (attempt + 1 >= attempts) throw;
            if (config_.sleep_on_retry)
                std::this_thread::sleep_for(config_.backoff_base * (1LL << attempt));
        }
    }
}

ChatResponse Gateway::complete(Role role, const std::string& system_prompt, const std::string& user_prompt) {
    ChatRequest req;
    req.role_tag = role;
    req.system_prompt = system_prompt;
    req.user_prompt = user_prompt;
    req.temperature = config_.temperature;
    req.max_tokens = config_.max_tokens;
    return complete(std::move(req));
}

UsageSnapshot Gateway::usage() const {
    std::lock_guard lock(mutex_);
    return usage_;
}

}  // namespace stride
