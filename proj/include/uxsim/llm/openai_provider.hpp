// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "uxsim/llm/gateway.hpp"

namespace uxsim::llm {

struct OpenAiOptions {
    std::string base_url = "https://api.openai.com";
    std::string api_key;
    std::string model = "gpt-5";
    std::chrono::seconds timeout{120};

    // Reads UXSIM_LLM_BASE_URL / OPENAI_BASE_URL, UXSIM_LLM_API_KEY /
    // OPENAI_API_KEY and UXSIM_LLM_MODEL.
    static OpenAiOptions from_env();
};

// Speaks the chat-completions wire format over HTTP(S).
class OpenAiProvider : public ChatProvider {
public:
    explicit OpenAiProvider(OpenAiOptions options);

    std::string name() const override { return "openai"; }
    ChatResponse send(const ChatRequest& request) override;

    // Exposed for tests: request body and response decoding.
    Json encode(const ChatRequest& request) const;
    static ChatResponse decode(const std::string& body);

private:
    OpenAiOptions options_;
};

// "mock" requires a script path; "mock-fn" is the hash-based mock; "openai"
// reads credentials from the environment.
std::shared_ptr<ChatProvider> make_provider(const std::string& name,
                                            const std::optional<std::filesystem::path>& script);

}  // namespace uxsim::llm
