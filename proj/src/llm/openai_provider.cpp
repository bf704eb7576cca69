// SPDX-License-Identifier: Apache-2.0

#include "uxsim/llm/openai_provider.hpp"

#include <httplib.h>

#include <cstdlib>

#include "uxsim/common/error.hpp"
#include "uxsim/llm/mock_provider.hpp"

namespace uxsim::llm {

namespace {
std::string env_or(const char* primary, const char* fallback, std::string def) {
    if (const char* v = std::getenv(primary); v && *v) return v;
    if (fallback) {
        if (const char* v = std::getenv(fallback); v && *v) return v;
    }
    return def;
}
}  // namespace

OpenAiOptions OpenAiOptions::from_env() {
    OpenAiOptions o;
    o.base_url = env_or("UXSIM_LLM_BASE_URL", "OPENAI_BASE_URL", o.base_url);
    o.api_key = env_or("UXSIM_LLM_API_KEY", "OPENAI_API_KEY", "");
    o.model = env_or("UXSIM_LLM_MODEL", nullptr, o.model);
    return o;
}

OpenAiProvider::OpenAiProvider(OpenAiOptions options) : options_(std::move(options)) {
    while (!options_.base_url.empty() && options_.base_url.back() == '/') options_.base_url.pop_back();
}

Json OpenAiProvider::encode(const ChatRequest& request) const {
    Json messages = Json::array();
    for (const auto& m : request.messages) messages.push_back(to_json(m));
    return {{"model", options_.model}, {"messages", messages}, {"temperature", request.temperature}};
}

ChatResponse OpenAiProvider::decode(const std::string& body) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProviderError(std::string("malformed provider payload: ") + e.what());
    }
    if (!j.is_object() || !j.contains("choices") || !j.at("choices").is_array() || j.at("choices").empty()) {
        throw ProviderError("malformed provider payload: missing choices");
    }
    const auto& choice = j.at("choices").at(0);
    if (!choice.is_object() || !choice.contains("message") || !choice.at("message").is_object()) {
        throw ProviderError("malformed provider payload: missing message");
    }
    const auto& msg = choice.at("message");
    ChatResponse r;
    if (msg.contains("content") && msg.at("content").is_string()) {
        r.text = msg.at("content").get<std::string>();
    } else if (msg.contains("content") && !msg.at("content").is_null()) {
        throw ProviderError("malformed provider payload: content is not a string");
    }
    if (msg.contains("refusal") && msg.at("refusal").is_string()) {
        r.provider_meta["refusal"] = msg.at("refusal");
    }
    if (j.contains("model")) r.provider_meta["model"] = j.at("model");
    if (j.contains("usage")) r.provider_meta["usage"] = j.at("usage");
    if (choice.contains("finish_reason")) r.provider_meta["finish_reason"] = choice.at("finish_reason");
    return r;
}

ChatResponse OpenAiProvider::send(const ChatRequest& request) {
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto res = client.Post("/v1/chat/completions", headers, dump_json(encode(request), -1), "application/json");
    if (!res) throw TransportError("chat completion request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500) {
        throw TransportError("provider returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    return decode(res->body);
}

std::shared_ptr<ChatProvider> make_provider(const std::string& name,
                                            const std::optional<std::filesystem::path>& script) {
    if (name == "mock") {
        if (!script) throw ConfigError("--llm mock requires a scripted transcript (--script)");
        return std::make_shared<ScriptedProvider>(ScriptedProvider::load(*script));
    }
    if (name == "mock-fn") return std::make_shared<FunctionProvider>();
    if (name == "openai") return std::make_shared<OpenAiProvider>(OpenAiOptions::from_env());
    throw ConfigError("unknown LLM provider '" + name + "'");
}

}  // namespace uxsim::llm
