// SPDX-License-Identifier: Apache-2.0

#include "uxsim/common/text.hpp"

#include <cctype>

namespace uxsim::text {

namespace {
bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (char c : s) {
        if (is_space(c)) {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string slugify(std::string_view s, char sep) {
    std::string out;
    bool pending = false;
    for (char raw : s) {
        auto c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            if (pending && !out.empty()) out.push_back(sep);
            pending = false;
            out.push_back(c);
        } else {
            pending = true;
        }
    }
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto key = std::string(tmpl.substr(i + 1, close - i - 1));
                if (auto it = vars.find(key); it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

std::optional<std::string> extract_fenced_block(std::string_view s) {
    auto open = s.find("```");
    if (open == std::string_view::npos) return std::nullopt;
    auto body_start = s.find('\n', open + 3);
    if (body_start == std::string_view::npos) return std::nullopt;
    ++body_start;
    auto close = s.find("```", body_start);
    if (close == std::string_view::npos) return std::nullopt;
    return std::string(s.substr(body_start, close - body_start));
}

std::string strip_code_fence(std::string_view s) {
    if (auto body = extract_fenced_block(s)) return trim(*body);
    return trim(s);
}

std::string truncate(std::string_view s, std::size_t max_chars) {
    if (s.size() <= max_chars) return std::string(s);
    // Back off to a UTF-8 sequence boundary.
    while (max_chars > 0 && (static_cast<unsigned char>(s[max_chars]) & 0xC0) == 0x80) --max_chars;
    return std::string(s.substr(0, max_chars)) + "...";
}

}  // namespace uxsim::text
