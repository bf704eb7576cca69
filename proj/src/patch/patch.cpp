// SPDX-License-Identifier: Apache-2.0

#include "uxsim/patch/patch.hpp"

#include <array>
#include <cctype>

#include "uxsim/common/text.hpp"
#include "uxsim/html/parser.hpp"
#include "uxsim/html/selector.hpp"

namespace uxsim::patch {

namespace {

using html::Node;
using html::NodeKind;
using html::NodePtr;

constexpr std::array<std::string_view, 11> kActionNames = {
    "replace_text",    "set_attribute", "remove_attribute", "add_class",      "remove_class", "insert_before",
    "insert_after",    "replace_element", "remove_element", "append_child",   "inject_style"};

struct MarkerScan {
    bool present = false;
    std::vector<Node*> elements;
};

// Finds a TARGET-START / TARGET-END comment pair sharing a parent and returns
// the elements between them.
MarkerScan scan_markers(Node& n) {
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        auto& c = n.children[i];
        if (c->kind == NodeKind::comment && text::trim(c->data) == "TARGET-START") {
            MarkerScan scan;
            for (std::size_t j = i + 1; j < n.children.size(); ++j) {
                auto& d = n.children[j];
                if (d->kind == NodeKind::comment && text::trim(d->data) == "TARGET-END") {
                    scan.present = true;
                    return scan;
                }
                if (d->is_element()) scan.elements.push_back(d.get());
            }
        }
        if (c->is_element()) {
            auto inner = scan_markers(*c);
            if (inner.present) return inner;
        }
    }
    return {};
}

Node* find_element_starting_at(Node& root, std::size_t offset) {
    for (Node* el : html::descendant_elements(root)) {
        if (el->src_begin == offset) return el;
    }
    return nullptr;
}

Node* resolve_unique(Node& root, const std::string& selector) {
    auto matches = html::Selector::parse(selector).query_all(root);
    if (matches.empty()) throw PatchError("selector '" + selector + "' matched no element");
    if (matches.size() > 1) {
        throw AmbiguousTargetError(
            "selector '" + selector + "' matched " + std::to_string(matches.size()) + " elements", matches.size());
    }
    return matches.front();
}

bool contains_ci(std::string_view hay, std::string_view needle) {
    return text::to_lower(hay).find(text::to_lower(needle)) != std::string::npos;
}

std::vector<NodePtr> parse_patch_fragment(const std::string& value) {
    auto nodes = html::parse_fragment(value, true);
    std::vector<Node*> work;
    for (auto& n : nodes) work.push_back(n.get());
    while (!work.empty()) {
        Node* n = work.back();
        work.pop_back();
        if (n->is_element() && n->tag == "script" && n->has_attr("src")) {
            throw PatchError("fragment loads an external script; remote resources are not allowed");
        }
        for (auto& c : n->children) work.push_back(c.get());
    }
    return nodes;
}

bool valid_attribute_name(std::string_view name) {
    if (name.empty()) return false;
    auto first = static_cast<unsigned char>(name[0]);
    if (!(std::isalpha(first) || name[0] == '_' || name[0] == ':')) return false;
    for (char c : name) {
        auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || c == '_' || c == ':' || c == '-' || c == '.')) return false;
    }
    return true;
}

std::vector<std::string> class_tokens(std::string_view s) {
    auto collapsed = text::collapse_whitespace(s);
    if (collapsed.empty()) return {};
    return text::split(collapsed, ' ');
}

Node* engine_style(Node& root) {
    for (Node* el : html::descendant_elements(root)) {
        if (el->tag == "style" && el->attr("id") == kEngineStyleId) return el;
    }
    return nullptr;
}

std::string inject_style(Node& root, const std::string& rules) {
    auto trimmed = text::trim(rules);
    if (trimmed.empty()) throw PatchError("inject_style requires CSS rules");
    if (trimmed.find('{') == std::string::npos || trimmed.find('}') == std::string::npos) {
        throw PatchError("inject_style value must be selector-scoped rules ('selector { ... }')");
    }
    if (contains_ci(trimmed, "</style")) throw PatchError("inject_style value may not close the style element");
    if (contains_ci(trimmed, "@import")) throw PatchError("inject_style value may not import external resources");

    if (Node* style = engine_style(root)) {
        std::string css;
        for (auto& c : style->children) css += c->data;
        css += trimmed + "\n";
        style->children.clear();
        style->append_child(Node::make_text(std::move(css)));
        return "appended rules to the engine style element";
    }
    auto style = Node::make_element("style");
    style->set_attr_raw("id", std::string(kEngineStyleId));
    style->append_child(Node::make_text("\n" + trimmed + "\n"));
    auto elements = html::descendant_elements(root);
    for (Node* el : elements) {
        if (el->tag == "head") {
            el->append_child(std::move(style));
            return "added engine style element to <head>";
        }
    }
    for (Node* el : elements) {
        if (el->tag == "body") {
            el->insert_child(0, std::move(style));
            return "added engine style element at the start of <body>";
        }
    }
    root.append_child(std::move(style));
    return "added engine style element to the document";
}

std::string describe(const Node& el) {
    std::string d = "<" + el.tag;
    if (auto id = el.attr("id"); !id.empty()) d += " id=\"" + id + "\"";
    return d + ">";
}

// Applies one patch to the live tree and returns a one-line summary.
std::string apply_to_tree(Node& root, const Patch& p) {
    if (p.action == Action::inject_style) return inject_style(root, p.value);

    Node* el = resolve_unique(root, p.selector);
    const auto where = p.selector;
    switch (p.action) {
        case Action::replace_text: {
            std::string data;
            if (html::is_raw_text_element(el->tag)) {
                if (contains_ci(p.value, "</" + el->tag)) throw PatchError("text would close <" + el->tag + ">");
                data = p.value;
            } else {
                data = html::escape_text(p.value);
            }
            el->children.clear();
            if (!data.empty()) el->append_child(Node::make_text(std::move(data)));
            return "replace_text " + where + ": text set to \"" + text::truncate(p.value, 60) + "\"";
        }
        case Action::set_attribute: {
            auto name = text::to_lower(*p.name);
            if (!valid_attribute_name(name)) throw PatchError("invalid attribute name '" + *p.name + "'");
            el->set_attr_raw(name, html::escape_attr(p.value));
            return "set_attribute " + where + ": " + name + "=\"" + text::truncate(p.value, 60) + "\"";
        }
        case Action::remove_attribute: {
            auto name = text::to_lower(*p.name);
            bool had = el->has_attr(name);
            el->remove_attr(name);
            return "remove_attribute " + where + ": " + name + (had ? " removed" : " was absent");
        }
        case Action::add_class: {
            auto add = class_tokens(p.value);
            if (add.empty()) throw PatchError("add_class requires a class name");
            const auto* attr = el->find_attr("class");
            std::string raw = attr ? attr->value : std::string{};
            auto have = class_tokens(html::decode_entities(raw));
            std::vector<std::string> added;
            for (const auto& t : add) {
                if (std::find(have.begin(), have.end(), t) != have.end()) continue;
                if (!text::trim(raw).empty() && raw.back() != ' ') raw += " ";
                raw += html::escape_attr(t);
                have.push_back(t);
                added.push_back(t);
            }
            if (!added.empty() || !attr) el->set_attr_raw("class", raw);
            return "add_class " + where + ": " + (added.empty() ? "already present" : "added " + p.value);
        }
        case Action::remove_class: {
            auto remove = class_tokens(p.value);
            if (remove.empty()) throw PatchError("remove_class requires a class name");
            if (!el->has_attr("class")) return "remove_class " + where + ": no class attribute";
            auto have = class_tokens(el->attr("class"));
            std::vector<std::string> kept;
            for (const auto& t : have) {
                if (std::find(remove.begin(), remove.end(), t) == remove.end()) kept.push_back(t);
            }
            if (kept.size() == have.size()) return "remove_class " + where + ": not present";
            if (kept.empty()) {
                el->remove_attr("class");
            } else {
                std::string joined;
                for (const auto& t : kept) joined += (joined.empty() ? "" : " ") + html::escape_attr(t);
                el->set_attr_raw("class", joined);
            }
            return "remove_class " + where + ": removed " + p.value;
        }
        case Action::insert_before:
        case Action::insert_after: {
            auto nodes = parse_patch_fragment(p.value);
            Node* parent = el->parent;
            auto idx = el->index_in_parent() + (p.action == Action::insert_after ? 1 : 0);
            for (auto& n : nodes) parent->insert_child(idx++, std::move(n));
            return std::string(to_string(p.action)) + " " + where + ": inserted fragment";
        }
        case Action::append_child: {
            if (html::is_void_element(el->tag) || html::is_raw_text_element(el->tag)) {
                throw PatchError("cannot append children to " + describe(*el));
            }
            for (auto& n : parse_patch_fragment(p.value)) el->append_child(std::move(n));
            return "append_child " + where + ": appended fragment";
        }
        case Action::replace_element: {
            auto nodes = parse_patch_fragment(p.value);
            Node* parent = el->parent;
            auto idx = el->index_in_parent();
            auto old = describe(*el);
            parent->remove_child(idx);
            for (auto& n : nodes) parent->insert_child(idx++, std::move(n));
            return "replace_element " + where + ": replaced " + old;
        }
        case Action::remove_element: {
            auto old = describe(*el);
            el->parent->remove_child(el->index_in_parent());
            return "remove_element " + where + ": removed " + old;
        }
        case Action::inject_style:
            break;
    }
    throw PatchError("unhandled patch action");
}

void validate_patch(const Patch& p, std::size_t index) {
    auto ctx = "patch " + std::to_string(index);
    bool attr_action = is_attribute_action(p.action);
    if (attr_action && (!p.name || p.name->empty())) {
        throw ValidationError(ctx + ": action " + std::string(to_string(p.action)) + " requires 'name'");
    }
    if (!attr_action && p.name) {
        throw ValidationError(ctx + ": 'name' is only allowed for attribute actions");
    }
    if (p.action != Action::inject_style && text::trim(p.selector).empty()) {
        throw ValidationError(ctx + ": empty selector");
    }
}

}  // namespace

Resolution resolve_target(std::string_view html_src, const Target& target) {
    auto root = html::parse_document(html_src);
    auto scan = scan_markers(*root);
    if (scan.present) {
        if (scan.elements.size() == 1) return Resolved{html::path_of(*scan.elements[0]), html::serialize(*scan.elements[0])};
        if (scan.elements.empty()) return NotFound{};
        return Ambiguous{scan.elements.size()};
    }
    switch (target.kind) {
        case Target::Kind::marker_pair:
            return NotFound{};
        case Target::Kind::css_selector: {
            auto matches = html::Selector::parse(target.value).query_all(*root);
            if (matches.empty()) return NotFound{};
            if (matches.size() > 1) return Ambiguous{matches.size()};
            return Resolved{html::path_of(*matches[0]), html::serialize(*matches[0])};
        }
        case Target::Kind::snippet: {
            if (target.value.empty()) return NotFound{};
            std::vector<std::size_t> hits;
            for (auto pos = html_src.find(target.value); pos != std::string_view::npos;
                 pos = html_src.find(target.value, pos + 1)) {
                hits.push_back(pos);
            }
            if (hits.empty()) return NotFound{};
            if (hits.size() > 1) return Ambiguous{hits.size()};
            Node* el = find_element_starting_at(*root, hits[0]);
            if (!el) return NotFound{};
            return Resolved{html::path_of(*el), html::serialize(*el)};
        }
    }
    return NotFound{};
}

std::string_view to_string(Action action) { return kActionNames[static_cast<std::size_t>(action)]; }

Action action_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kActionNames.size(); ++i) {
        if (kActionNames[i] == s) return static_cast<Action>(i);
    }
    throw ValidationError("unknown patch action '" + std::string(s) + "'");
}

bool is_attribute_action(Action action) {
    return action == Action::set_attribute || action == Action::remove_attribute;
}

std::string_view to_string(Status status) {
    switch (status) {
        case Status::ok: return "ok";
        case Status::ambiguous: return "ambiguous";
        case Status::impossible: return "impossible";
    }
    return "impossible";
}

void validate(const PatchSet& ps) {
    if (ps.status == Status::ok && ps.patches.empty()) {
        throw ValidationError("patchset with status ok must contain at least one patch");
    }
    if (ps.status != Status::ok && !ps.patches.empty()) {
        throw ValidationError("patchset with status " + std::string(to_string(ps.status)) + " must not contain patches");
    }
    for (std::size_t i = 0; i < ps.patches.size(); ++i) validate_patch(ps.patches[i], i + 1);
}

Json to_json(const Patch& p) {
    Json j;
    j["selector"] = p.selector;
    j["action"] = std::string(to_string(p.action));
    j["value"] = p.value;
    j["rationale"] = p.rationale;
    if (p.name) j["name"] = *p.name;
    return j;
}

Json to_json(const PatchSet& ps) {
    Json patches = Json::array();
    for (const auto& p : ps.patches) patches.push_back(to_json(p));
    Json j;
    j["status"] = std::string(to_string(ps.status));
    j["patches"] = patches;
    j["notes"] = ps.notes;
    return j;
}

PatchSet patchset_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("patchset must be a JSON object");
    PatchSet ps;
    auto status = require_string(j, "status", "patchset");
    if (status == "ok") ps.status = Status::ok;
    else if (status == "ambiguous") ps.status = Status::ambiguous;
    else if (status == "impossible") ps.status = Status::impossible;
    else throw ValidationError("patchset: unknown status '" + status + "'");

    if (j.contains("notes")) {
        if (!j.at("notes").is_string()) throw ValidationError("patchset: 'notes' must be a string");
        ps.notes = j.at("notes").get<std::string>();
    }
    if (j.contains("patches")) {
        const auto& arr = j.at("patches");
        if (!arr.is_array()) throw ValidationError("patchset: 'patches' must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& pj = arr[i];
            auto ctx = "patch " + std::to_string(i + 1);
            if (!pj.is_object()) throw ValidationError(ctx + ": must be an object");
            Patch p;
            p.action = action_from_string(require_string(pj, "action", ctx));
            p.selector = pj.contains("selector") ? require_string(pj, "selector", ctx) : std::string{};
            if (pj.contains("value")) p.value = require_string(pj, "value", ctx);
            if (pj.contains("rationale")) p.rationale = require_string(pj, "rationale", ctx);
            if (pj.contains("name")) p.name = require_string(pj, "name", ctx);
            ps.patches.push_back(std::move(p));
        }
    }
    validate(ps);
    return ps;
}

PatchSet parse_patchset_response(std::string_view text_in) {
    auto body = text::strip_code_fence(text_in);
    if (body.empty() || body.front() != '{') throw ParseError("editor response holds no JSON object");
    return patchset_from_json(parse_json(body, "editor response"));
}

std::string apply_patch(std::string_view html_src, const Patch& patch) {
    validate_patch(patch, 1);
    auto root = html::parse_document(html_src);
    apply_to_tree(*root, patch);
    return html::serialize(*root);
}

PatchSetResult apply_patchset(std::string_view html_src, const PatchSet& ps) {
    if (ps.status != Status::ok) {
        throw ValidationError("patchset status is " + std::string(to_string(ps.status)) + "; only ok sets apply");
    }
    validate(ps);

    PatchSetResult result;
    auto root = html::parse_document(html_src);
    for (std::size_t i = 0; i < ps.patches.size(); ++i) {
        const auto& p = ps.patches[i];
        try {
            auto summary = apply_to_tree(*root, p);
            result.applied.push_back({i + 1, p.selector, p.action, std::move(summary)});
        } catch (const Error& e) {
            PatchSetResult failed;
            failed.status = dynamic_cast<const AmbiguousTargetError*>(&e) ? Status::ambiguous : Status::impossible;
            failed.html = std::string(html_src);
            failed.failing_index = i + 1;
            failed.error = "patch " + std::to_string(i + 1) + " (" + std::string(to_string(p.action)) + "): " + e.what();
            failed.diff_summary = "no changes applied; " + failed.error;
            return failed;
        }
    }
    result.status = Status::ok;
    result.html = html::serialize(*root);
    std::string summary;
    for (const auto& a : result.applied) summary += std::to_string(a.index) + ". " + a.summary + "\n";
    summary += std::to_string(result.applied.size()) + " patch(es) applied; document " +
               std::to_string(html_src.size()) + " -> " + std::to_string(result.html.size()) + " bytes";
    result.diff_summary = std::move(summary);
    return result;
}

Json to_json(const PatchSetResult& r) {
    Json applied = Json::array();
    for (const auto& a : r.applied) {
        applied.push_back({{"index", a.index},
                           {"selector", a.selector},
                           {"action", std::string(to_string(a.action))},
                           {"summary", a.summary}});
    }
    Json j;
    j["version"] = "1.0";
    j["status"] = std::string(to_string(r.status));
    j["applied"] = applied;
    j["diff_summary"] = r.diff_summary;
    if (r.failing_index) j["failing_index"] = *r.failing_index;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

}  // namespace uxsim::patch
