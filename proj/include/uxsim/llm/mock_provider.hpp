// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "uxsim/llm/gateway.hpp"

namespace uxsim::llm {

struct ScriptEntry {
    // Substring of the last user message, or "*" for any request.
    std::string match;
    std::string response;
};

// Replays a scripted transcript. Each call consumes the first unconsumed
// entry whose matcher fits; when none fits the call is a hard error.
class ScriptedProvider : public ChatProvider {
public:
    explicit ScriptedProvider(std::vector<ScriptEntry> entries);

    // Accepts {"version": "1.0", "entries": [...]} or a bare entry array.
    static std::vector<ScriptEntry> load(const std::filesystem::path& path);
    static std::vector<ScriptEntry> from_json(const Json& j);

    std::string name() const override { return "mock"; }
    ChatResponse send(const ChatRequest& request) override;

    std::size_t remaining() const;

private:
    mutable std::mutex mu_;
    std::vector<ScriptEntry> entries_;
    std::vector<bool> consumed_;
};

// Referentially transparent mock: the response is a pure function of the
// request. The default function hashes messages and temperature.
class FunctionProvider : public ChatProvider {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    FunctionProvider();
    explicit FunctionProvider(Fn fn);

    std::string name() const override { return "mock-fn"; }
    ChatResponse send(const ChatRequest& request) override;

private:
    Fn fn_;
};

}  // namespace uxsim::llm
