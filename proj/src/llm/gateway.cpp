// SPDX-License-Identifier: Apache-2.0

#include "uxsim/llm/gateway.hpp"

#include <algorithm>
#include <thread>

#include "uxsim/common/error.hpp"

namespace uxsim::llm {

double TemperaturePolicy::for_purpose(Purpose p) const {
    switch (p) {
        case Purpose::simulation: return simulation;
        case Purpose::annotation: return annotation;
        case Purpose::refinement: return refinement;
    }
    return annotation;
}

TemperaturePolicy TemperaturePolicy::with_overrides(const std::map<std::string, double>& overrides) {
    TemperaturePolicy p;
    for (const auto& [k, v] : overrides) {
        if (k == "simulation") p.simulation = v;
        else if (k == "annotation") p.annotation = v;
        else if (k == "refinement") p.refinement = v;
        else throw ConfigError("unknown temperature purpose '" + k + "'");
    }
    return p;
}

RateLimiter::RateLimiter(double tokens_per_second, double burst)
    : rate_(tokens_per_second), burst_(std::max(1.0, burst)), tokens_(burst_),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (rate_ <= 0.0) return;
    std::unique_lock lock(mu_);
    while (true) {
        auto now = std::chrono::steady_clock::now();
        std::chrono::duration<double> elapsed = now - last_;
        last_ = now;
        tokens_ = std::min(burst_, tokens_ + elapsed.count() * rate_);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
        lock.unlock();
        std::this_thread::sleep_for(wait);
        lock.lock();
    }
}

Json to_json(const Exchange& e) {
    Json messages = Json::array();
    for (const auto& m : e.request.messages) messages.push_back(to_json(m));
    Json j;
    j["seq"] = e.seq;
    j["context"] = e.request.context;
    j["tag"] = std::string(to_string(e.request.tag));
    j["temperature"] = e.request.temperature;
    j["messages"] = messages;
    j["response"] = e.response.text;
    j["provider_meta"] = e.response.provider_meta;
    j["attempts"] = e.attempts;
    if (!e.error.empty()) j["error"] = e.error;
    return j;
}

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, GatewayOptions options)
    : provider_(std::move(provider)), options_(options),
      limiter_(options.requests_per_second, options.burst) {
    if (!provider_) throw ConfigError("gateway requires a provider");
    if (options_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

ChatRequest Gateway::make_request(Purpose tag, std::vector<ChatMessage> messages, std::string context) const {
    ChatRequest r;
    r.messages = std::move(messages);
    r.tag = tag;
    r.temperature = options_.temperatures.for_purpose(tag);
    r.context = std::move(context);
    return r;
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    if (request.messages.empty()) throw ValidationError("chat request has no messages");
    if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
        throw ValidationError("chat request temperature outside [0, 2]");
    }

    Exchange ex;
    ex.request = request;
    std::string last_transport_error;
    for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
        ex.attempts = attempt;
        limiter_.acquire();
        try {
            ex.response = provider_->send(request);
            record(ex);
            return ex.response;
        } catch (const TransportError& e) {
            last_transport_error = e.what();
            if (attempt < options_.max_attempts) {
                std::this_thread::sleep_for(options_.backoff_base * (1 << (attempt - 1)));
            }
        } catch (const Error& e) {
            ex.error = e.what();
            record(ex);
            throw;
        }
    }
    ex.error = "transport failure after " + std::to_string(options_.max_attempts) +
               " attempts: " + last_transport_error;
    record(ex);
    throw ProviderError(ex.error);
}

void Gateway::add_recorder(Recorder recorder) {
    std::lock_guard lock(mu_);
    recorders_.push_back(std::move(recorder));
}

std::vector<Exchange> Gateway::transcript() const {
    std::lock_guard lock(mu_);
    return transcript_;
}

void Gateway::record(Exchange exchange) {
    std::lock_guard lock(mu_);
    exchange.seq = next_seq_++;
    for (const auto& r : recorders_) r(exchange);
    transcript_.push_back(std::move(exchange));
}

}  // namespace uxsim::llm
