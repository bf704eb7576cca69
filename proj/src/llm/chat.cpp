// SPDX-License-Identifier: Apache-2.0

#include "uxsim/llm/chat.hpp"

#include <charconv>

#include "uxsim/common/error.hpp"

namespace uxsim::llm {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw ParseError("unknown chat role '" + std::string(s) + "'");
}

std::string_view to_string(Purpose purpose) {
    switch (purpose) {
        case Purpose::simulation: return "simulation";
        case Purpose::annotation: return "annotation";
        case Purpose::refinement: return "refinement";
    }
    return "annotation";
}

const ChatMessage* ChatRequest::last_user_message() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::user) return &*it;
    }
    return nullptr;
}

std::string render_prompt(const std::vector<ChatMessage>& messages) {
    std::string out;
    for (const auto& m : messages) {
        out += "<<";
        out += to_string(m.role);
        out += " " + std::to_string(m.content.size()) + ">>\n";
        out += m.content;
        out += "\n";
    }
    return out;
}

std::vector<ChatMessage> parse_prompt(std::string_view text) {
    std::vector<ChatMessage> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos || text.substr(pos, 2) != "<<" || text.substr(eol - 2, 2) != ">>") {
            throw ParseError("prompt text is not length-framed at offset " + std::to_string(pos));
        }
        auto header = text.substr(pos + 2, eol - pos - 4);
        auto space = header.find(' ');
        if (space == std::string_view::npos) throw ParseError("malformed prompt frame header");
        std::size_t len = 0;
        auto num = header.substr(space + 1);
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), len);
        if (ec != std::errc{} || ptr != num.data() + num.size()) throw ParseError("malformed prompt frame length");
        auto body = eol + 1;
        if (body + len + 1 > text.size() || text[body + len] != '\n') throw ParseError("truncated prompt frame");
        out.push_back({role_from_string(header.substr(0, space)), std::string(text.substr(body, len))});
        pos = body + len + 1;
    }
    return out;
}

Json to_json(const ChatMessage& m) {
    return {{"role", std::string(to_string(m.role))}, {"content", m.content}};
}

}  // namespace uxsim::llm
