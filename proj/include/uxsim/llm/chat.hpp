// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uxsim/common/json.hpp"

namespace uxsim::llm {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

// What a request is for. Determines its default sampling temperature.
enum class Purpose { simulation, annotation, refinement };

std::string_view to_string(Purpose purpose);

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    Purpose tag = Purpose::annotation;
    // Free-form provenance label (run id, issue id); never sent to providers.
    std::string context;

    const ChatMessage* last_user_message() const;
};

struct ChatResponse {
    std::string text;
    Json provider_meta = Json::object();
};

// Length-framed transcript form used for StepEvent.prompt_text. Each message
// renders as "<<role N>>\n" + N bytes of content + "\n", so parse_prompt
// recovers the exact message list regardless of content.
std::string render_prompt(const std::vector<ChatMessage>& messages);
std::vector<ChatMessage> parse_prompt(std::string_view text);

Json to_json(const ChatMessage& m);

}  // namespace uxsim::llm
