// SPDX-License-Identifier: Apache-2.0

#include "uxsim/llm/mock_provider.hpp"

#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/common/hash.hpp"
#include "uxsim/common/text.hpp"

namespace uxsim::llm {

ScriptedProvider::ScriptedProvider(std::vector<ScriptEntry> entries)
    : entries_(std::move(entries)), consumed_(entries_.size(), false) {}

std::vector<ScriptEntry> ScriptedProvider::from_json(const Json& j) {
    const Json* list = &j;
    if (j.is_object()) {
        if (j.contains("version") && j.at("version") != "1.0") throw ConfigError("unsupported script version");
        list = &require_field(j, "entries", "script");
    }
    if (!list->is_array()) throw ConfigError("script entries must be an array");
    std::vector<ScriptEntry> out;
    for (const auto& e : *list) {
        if (!e.is_object() || !e.contains("match") || !e.contains("response") || !e.at("match").is_string() ||
            !e.at("response").is_string()) {
            throw ConfigError("script entry needs string fields 'match' and 'response'");
        }
        out.push_back({e.at("match").get<std::string>(), e.at("response").get<std::string>()});
    }
    return out;
}

std::vector<ScriptEntry> ScriptedProvider::load(const std::filesystem::path& path) {
    return from_json(parse_json(fs::read_file(path), path.string()));
}

ChatResponse ScriptedProvider::send(const ChatRequest& request) {
    const auto* user = request.last_user_message();
    std::string_view haystack = user ? std::string_view(user->content) : std::string_view{};
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (consumed_[i]) continue;
        const auto& e = entries_[i];
        if (e.match == "*" || haystack.find(e.match) != std::string_view::npos) {
            consumed_[i] = true;
            ChatResponse r;
            r.text = e.response;
            r.provider_meta = {{"model", "mock-script"}, {"entry", i + 1}};
            return r;
        }
    }
    throw ProviderError("scripted transcript exhausted: no entry matches request '" +
                        text::truncate(text::collapse_whitespace(haystack), 120) + "'");
}

std::size_t ScriptedProvider::remaining() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (bool c : consumed_) n += c ? 0 : 1;
    return n;
}

FunctionProvider::FunctionProvider()
    : fn_([](const ChatRequest& r) {
          return "mock-" + sha256_hex(render_prompt(r.messages) + "|" + std::to_string(r.temperature)).substr(0, 16);
      }) {}

FunctionProvider::FunctionProvider(Fn fn) : fn_(std::move(fn)) {}

ChatResponse FunctionProvider::send(const ChatRequest& request) {
    ChatResponse r;
    r.text = fn_(request);
    r.provider_meta = {{"model", "mock-fn"}};
    return r;
}

}  // namespace uxsim::llm
