// SPDX-License-Identifier: Apache-2.0

#include "uxsim/env/page_state.hpp"

#include <array>
#include <charconv>

#include "uxsim/common/error.hpp"
#include "uxsim/common/text.hpp"
#include "uxsim/html/parser.hpp"
#include "uxsim/html/selector.hpp"

namespace uxsim::env {

namespace {

constexpr std::array<std::string_view, 13> kStateAttributes = {
    "id",    "class", "href",       "type", "name",     "placeholder",   "value",
    "title", "role",  "aria-label", "style", "disabled", "aria-disabled"};

constexpr std::array<std::string_view, 6> kKindNames = {"click", "scroll", "type", "navigate", "go_back", "done"};

std::string implicit_role(const html::Node& el) {
    if (auto role = el.attr("role"); !role.empty()) return role;
    const auto& t = el.tag;
    if (t == "a") return "link";
    if (t == "button") return "button";
    if (t == "select") return "combobox";
    if (t == "textarea") return "textbox";
    if (t == "input") {
        auto type = text::to_lower(el.attr("type"));
        if (type == "submit" || type == "button" || type == "reset" || type == "image") return "button";
        if (type == "checkbox" || type == "radio") return type;
        if (type == "range") return "slider";
        if (type == "search") return "searchbox";
        return "textbox";
    }
    return "clickable";
}

std::string visible_text(const html::Node& el) {
    auto t = text::collapse_whitespace(html::text_content(el));
    if (t.empty() && el.tag == "input") t = el.attr("value");
    if (t.empty()) t = el.attr("aria-label");
    return text::truncate(t, 100);
}

std::optional<int> parse_int(std::string_view s) {
    auto t = text::trim(s);
    std::string_view v = t;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) return std::nullopt;
    return out;
}

}  // namespace

const ElementInfo* PageState::element(int index) const {
    if (index < 1 || static_cast<std::size_t>(index) > elements.size()) return nullptr;
    return &elements[static_cast<std::size_t>(index) - 1];
}

bool is_interactive(const html::Node& el) {
    if (!el.is_element()) return false;
    const auto& t = el.tag;
    if (t == "a") return el.has_attr("href");
    if (t == "input") return text::to_lower(el.attr("type")) != "hidden";
    if (t == "button" || t == "select" || t == "textarea") return true;
    return el.has_attr("onclick");
}

std::vector<html::Node*> interactive_elements(html::Node& root) {
    std::vector<html::Node*> out;
    for (auto* el : html::descendant_elements(root)) {
        if (is_interactive(*el)) out.push_back(el);
    }
    return out;
}

PageState extract_page_state(std::string_view html_src, std::string url, int scroll_offset) {
    auto root = html::parse_document(html_src);
    PageState state;
    state.url = std::move(url);
    state.scroll_offset = scroll_offset;
    for (auto* el : html::descendant_elements(*root)) {
        if (el->tag == "title") {
            state.title = text::collapse_whitespace(html::decode_entities(html::serialize_children(*el)));
            break;
        }
    }
    int index = 0;
    for (auto* el : interactive_elements(*root)) {
        ElementInfo info;
        info.index = ++index;
        info.selector = html::unique_selector(*el, *root);
        info.tag = el->tag;
        info.role = implicit_role(*el);
        info.text = visible_text(*el);
        for (auto name : kStateAttributes) {
            if (const auto* a = el->find_attr(name)) {
                info.attributes.emplace_back(std::string(name), a->has_value ? html::decode_entities(a->value) : "");
            }
        }
        state.elements.push_back(std::move(info));
    }
    state.tabs.push_back({"1", state.url, state.title});
    return state;
}

std::string serialize_page_state(const PageState& s) {
    std::string out;
    out += "URL: " + s.url + "\n";
    out += "Title: " + s.title + "\n";
    out += "Tabs:";
    for (const auto& t : s.tabs) out += " [" + t.id + "] " + t.url;
    out += "\n";
    out += "Scroll offset: " + std::to_string(s.scroll_offset) + "px (viewport " + std::to_string(kViewportHeight) +
           "px)\n";
    out += "Interactive elements:\n";
    if (s.elements.empty()) out += "(none)\n";
    for (const auto& e : s.elements) {
        out += "[" + std::to_string(e.index) + "]<" + e.tag;
        for (const auto& [name, value] : e.attributes) {
            out += " " + name;
            if (!value.empty()) out += "=\"" + text::truncate(value, 80) + "\"";
        }
        out += ">";
        if (!html::is_void_element(e.tag)) out += e.text + "</" + e.tag + ">";
        out += "\n";
    }
    return out;
}

std::string replace_state_block(std::string_view prompt, const PageState& state) {
    auto begin = prompt.find(kStateBegin);
    if (begin == std::string_view::npos) throw PreviewError("recorded prompt has no page-state block");
    auto body = begin + kStateBegin.size();
    auto end = prompt.find(kStateEnd, body);
    if (end == std::string_view::npos) throw PreviewError("recorded prompt has an unterminated page-state block");
    std::string out(prompt.substr(0, body));
    out += serialize_page_state(state);
    out += prompt.substr(end);
    return out;
}

Json to_json(const PageState& s) {
    Json j;
    j["url"] = s.url;
    j["title"] = s.title;
    j["scroll_offset"] = s.scroll_offset;
    Json tabs = Json::array();
    for (const auto& t : s.tabs) tabs.push_back({{"id", t.id}, {"url", t.url}, {"title", t.title}});
    j["tabs"] = tabs;
    Json elements = Json::array();
    for (const auto& e : s.elements) {
        Json ej;
        ej["index"] = e.index;
        ej["selector"] = e.selector;
        ej["tag"] = e.tag;
        ej["role"] = e.role;
        ej["text"] = e.text;
        Json attrs = Json::object();
        for (const auto& [k, v] : e.attributes) attrs[k] = v;
        ej["attributes"] = attrs;
        if (e.bbox) ej["bbox"] = {e.bbox->x, e.bbox->y, e.bbox->width, e.bbox->height};
        elements.push_back(std::move(ej));
    }
    j["elements"] = elements;
    if (s.screenshot_ref) j["screenshot_ref"] = *s.screenshot_ref;
    return j;
}

PageState page_state_from_json(const Json& j) {
    PageState s;
    s.url = require_string(j, "url", "page_state");
    s.title = j.value("title", "");
    s.scroll_offset = j.value("scroll_offset", 0);
    for (const auto& t : j.value("tabs", Json::array())) {
        s.tabs.push_back({t.value("id", ""), t.value("url", ""), t.value("title", "")});
    }
    for (const auto& ej : j.value("elements", Json::array())) {
        ElementInfo e;
        e.index = ej.at("index").get<int>();
        e.selector = ej.value("selector", "");
        e.tag = ej.value("tag", "");
        e.role = ej.value("role", "");
        e.text = ej.value("text", "");
        const auto attrs = ej.value("attributes", Json::object());
        for (const auto& [k, v] : attrs.items()) {
            e.attributes.emplace_back(k, v.get<std::string>());
        }
        if (ej.contains("bbox")) {
            const auto& b = ej.at("bbox");
            e.bbox = BoundingBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                                 b.at(3).get<double>()};
        }
        s.elements.push_back(std::move(e));
    }
    if (j.contains("screenshot_ref")) s.screenshot_ref = j.at("screenshot_ref").get<std::string>();
    return s;
}

std::string_view to_string(ActionKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

ActionKind action_kind_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == s) return static_cast<ActionKind>(i);
    }
    throw ValidationError("unknown action kind '" + std::string(s) + "'");
}

void validate(const AgentAction& a) {
    auto kind = std::string(to_string(a.kind));
    if ((a.kind == ActionKind::click || a.kind == ActionKind::type) && !a.target_index) {
        throw ValidationError(kind + " requires target_index");
    }
    if (a.target_index && *a.target_index < 1) throw ValidationError("target_index must be >= 1");
    if (a.kind == ActionKind::type && !a.payload) throw ValidationError("type requires payload text");
    if (a.kind == ActionKind::navigate && (!a.payload || text::trim(*a.payload).empty())) {
        throw ValidationError("navigate requires a payload url");
    }
    if (a.kind == ActionKind::scroll && a.payload && !parse_int(*a.payload)) {
        throw ValidationError("scroll payload must be an integer pixel delta");
    }
    if (a.kind == ActionKind::done && !a.success) throw ValidationError("done requires a success flag");
    if (a.kind != ActionKind::done && a.success) throw ValidationError("success flag is only valid on done");
}

std::string describe(const AgentAction& a) {
    std::string d(to_string(a.kind));
    if (a.target_index) d += " [" + std::to_string(*a.target_index) + "]";
    if (a.payload) d += a.kind == ActionKind::type ? " \"" + *a.payload + "\"" : " " + *a.payload;
    if (a.success) d += *a.success ? " (success)" : " (failure)";
    return d;
}

int scroll_delta(const AgentAction& a) {
    if (!a.payload) return kViewportHeight;
    auto v = parse_int(*a.payload);
    if (!v) throw ValidationError("scroll payload must be an integer pixel delta");
    return *v;
}

Json to_json(const AgentAction& a) {
    Json j;
    j["kind"] = std::string(to_string(a.kind));
    if (a.target_index) j["target_index"] = *a.target_index;
    if (a.payload) j["payload"] = *a.payload;
    if (a.success) j["success"] = *a.success;
    return j;
}

AgentAction action_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("action must be an object");
    AgentAction a;
    a.kind = action_kind_from_string(require_string(j, "kind", "action"));
    if (j.contains("target_index") && !j.at("target_index").is_null()) {
        const auto& t = j.at("target_index");
        if (!t.is_number_integer()) throw ValidationError("target_index must be an integer");
        a.target_index = t.get<int>();
    }
    if (j.contains("payload") && !j.at("payload").is_null()) {
        const auto& p = j.at("payload");
        if (p.is_string()) a.payload = p.get<std::string>();
        else if (p.is_number_integer()) a.payload = std::to_string(p.get<long long>());
        else throw ValidationError("payload must be a string");
    }
    for (const char* key : {"success", "success_flag"}) {
        if (j.contains(key) && !j.at(key).is_null()) {
            if (!j.at(key).is_boolean()) throw ValidationError(std::string(key) + " must be a boolean");
            a.success = j.at(key).get<bool>();
        }
    }
    validate(a);
    return a;
}

}  // namespace uxsim::env
