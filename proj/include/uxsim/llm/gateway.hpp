// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "uxsim/llm/chat.hpp"

namespace uxsim::llm {

// A chat-completion backend. Implementations throw TransportError for
// retryable network failures and ProviderError for anything else.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string name() const = 0;
    virtual ChatResponse send(const ChatRequest& request) = 0;
};

// Simulation samples at 1.0 for behavioral diversity; annotation and
// refinement are deterministic.
struct TemperaturePolicy {
    double simulation = 1.0;
    double annotation = 0.0;
    double refinement = 0.0;

    double for_purpose(Purpose p) const;
    static TemperaturePolicy with_overrides(const std::map<std::string, double>& overrides);
};

// Blocking token bucket. A rate of 0 disables limiting.
class RateLimiter {
public:
    RateLimiter(double tokens_per_second, double burst);
    void acquire();

private:
    std::mutex mu_;
    double rate_;
    double burst_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
};

struct GatewayOptions {
    TemperaturePolicy temperatures;
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{200};
    double requests_per_second = 0.0;
    double burst = 4.0;
};

struct Exchange {
    std::uint64_t seq = 0;
    ChatRequest request;
    ChatResponse response;
    int attempts = 0;
    std::string error;
};

Json to_json(const Exchange& e);

class Gateway {
public:
    using Recorder = std::function<void(const Exchange&)>;

    Gateway(std::shared_ptr<ChatProvider> provider, GatewayOptions options = {});

    // Builds a request whose temperature follows the policy for `tag`.
    ChatRequest make_request(Purpose tag, std::vector<ChatMessage> messages, std::string context = {}) const;

    // Validates, rate-limits, retries transport failures with exponential
    // backoff and records the exchange (including failures).
    ChatResponse complete(const ChatRequest& request);

    void add_recorder(Recorder recorder);
    std::vector<Exchange> transcript() const;
    const GatewayOptions& options() const { return options_; }
    const ChatProvider& provider() const { return *provider_; }

private:
    void record(Exchange exchange);

    std::shared_ptr<ChatProvider> provider_;
    GatewayOptions options_;
    RateLimiter limiter_;
    mutable std::mutex mu_;
    std::uint64_t next_seq_ = 1;
    std::vector<Exchange> transcript_;
    std::vector<Recorder> recorders_;
};

}  // namespace uxsim::llm
