#pragma once

#include <mutex>

#include "stride/gateway.hpp"

namespace stride {

// Per-question view of the shared gateway: same provider, retry policy and
// in-flight cap, but an isolated usage meter so concurrent questions account
// their own tokens.
class GatewaySession {
public:
    explicit GatewaySession(Gateway& gateway) : gateway_(gateway) {}

    ChatResponse complete(Role role, const std::string& system_prompt, const std::string& user_prompt) {
        ChatResponse resp = gateway_.complete(role, system_prompt, user_prompt);
        std::lock_guard lock(mutex_);
        usage_ += resp.token_usage;
        return resp;
    }

    TokenUsage usage() const {
        std::lock_guard lock(mutex_);
        return usage_;
    }

    Gateway& gateway() { return gateway_; }

private:
    Gateway& gateway_;
    mutable std::mutex mutex_;
    TokenUsage usage_;
};

}  // namespace stride
