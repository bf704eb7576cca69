// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uxsim/common/json.hpp"
#include "uxsim/html/dom.hpp"

namespace uxsim::env {

inline constexpr int kViewportHeight = 900;

// Delimiters around the serialized page state inside the agent prompt.
// Preview replay swaps the text between them.
inline constexpr std::string_view kStateBegin = "=== PAGE STATE ===\n";
inline constexpr std::string_view kStateEnd = "=== END PAGE STATE ===";

struct BoundingBox {
    double x = 0, y = 0, width = 0, height = 0;
    bool operator==(const BoundingBox&) const = default;
};

struct ElementInfo {
    int index = 0;  // 1-based, document order
    std::string selector;
    std::string tag;
    std::string role;
    std::string text;
    std::vector<std::pair<std::string, std::string>> attributes;  // decoded, fixed order
    std::optional<BoundingBox> bbox;

    bool operator==(const ElementInfo&) const = default;
};

struct TabInfo {
    std::string id;
    std::string url;
    std::string title;
    bool operator==(const TabInfo&) const = default;
};

struct PageState {
    std::string url;
    std::string title;
    std::vector<ElementInfo> elements;
    std::vector<TabInfo> tabs;
    int scroll_offset = 0;
    std::optional<std::string> screenshot_ref;

    const ElementInfo* element(int index) const;
    bool operator==(const PageState&) const = default;
};

// Anchors with href, buttons, inputs, selects, textareas and elements with an
// onclick attribute, in document order.
bool is_interactive(const html::Node& el);
std::vector<html::Node*> interactive_elements(html::Node& root);

PageState extract_page_state(std::string_view html, std::string url, int scroll_offset);

// Prompt form: header lines then one "[i]<tag attrs>text</tag>" line per
// element.
std::string serialize_page_state(const PageState& state);

// Replaces the state block between kStateBegin and kStateEnd. Throws
// PreviewError when the text has no such block.
std::string replace_state_block(std::string_view prompt, const PageState& state);

Json to_json(const PageState& s);
PageState page_state_from_json(const Json& j);

enum class ActionKind { click, scroll, type, navigate, go_back, done };

std::string_view to_string(ActionKind k);
// Throws ValidationError "unknown action kind '<s>'".
ActionKind action_kind_from_string(std::string_view s);

struct AgentAction {
    ActionKind kind = ActionKind::done;
    std::optional<int> target_index;
    std::optional<std::string> payload;  // typed text, url or scroll delta
    std::optional<bool> success;         // done only

    bool operator==(const AgentAction&) const = default;
};

// click/type need a target, navigate a payload, done a success flag.
void validate(const AgentAction& a);
std::string describe(const AgentAction& a);
// Pixel delta of a scroll action; one viewport down when no payload.
int scroll_delta(const AgentAction& a);

Json to_json(const AgentAction& a);
AgentAction action_from_json(const Json& j);

}  // namespace uxsim::env
