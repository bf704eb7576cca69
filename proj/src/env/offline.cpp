// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>

#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/common/json.hpp"
#include "uxsim/common/text.hpp"
#include "uxsim/env/environment.hpp"
#include "uxsim/html/parser.hpp"

namespace uxsim::env {

namespace {

std::string quoted_text(const html::Node& el) {
    auto t = text::truncate(text::collapse_whitespace(html::text_content(el)), 40);
    if (t.empty()) t = el.attr("value");
    return "<" + el.tag + ">" + (t.empty() ? "" : " \"" + t + "\"");
}

html::Node* enclosing_form(html::Node& el) {
    for (auto* p = el.parent; p; p = p->parent) {
        if (p->is_element() && p->tag == "form") return p;
    }
    return nullptr;
}

bool is_text_input(const html::Node& el) {
    if (el.tag != "input") return false;
    auto type = text::to_lower(el.attr("type"));
    return type != "checkbox" && type != "radio" && type != "submit" && type != "button" && type != "reset" &&
           type != "image" && type != "file";
}

}  // namespace

bool is_absolute_url(std::string_view url) {
    if (text::starts_with(url, "//")) return true;
    auto colon = url.find(':');
    if (colon == std::string_view::npos || colon == 0) return false;
    auto slash = url.find_first_of("/?#");
    if (slash != std::string_view::npos && slash < colon) return false;
    return std::all_of(url.begin(), url.begin() + static_cast<std::ptrdiff_t>(colon), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
    });
}

std::string resolve_site_path(std::string_view base, std::string_view href) {
    auto cut = [](std::string_view s) { return s.substr(0, std::min(s.find_first_of("?#"), s.size())); };
    auto b = cut(base);
    auto h = cut(href);
    std::string joined;
    if (h.empty()) joined = std::string(b);
    else if (h.front() == '/') joined = std::string(h);
    else joined = std::string(b.substr(0, b.rfind('/') == std::string_view::npos ? 0 : b.rfind('/') + 1)) + std::string(h);

    std::vector<std::string> segments;
    auto parts = text::split(joined, '/');
    bool trailing = joined.empty() || joined.back() == '/';
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& seg = parts[i];
        bool last = i + 1 == parts.size();
        if (seg.empty() || seg == ".") {
            if (last && seg == ".") trailing = true;
            continue;
        }
        if (seg == "..") {
            if (!segments.empty()) segments.pop_back();
            if (last) trailing = true;
            continue;
        }
        segments.push_back(seg);
    }
    std::string out;
    for (const auto& s : segments) out += "/" + s;
    if (out.empty() || trailing) out += "/";
    return out;
}

NavMap NavMap::load(const std::filesystem::path& snapshot_dir) {
    NavMap map;
    auto path = snapshot_dir / "navmap.json";
    if (!std::filesystem::exists(path)) return map;
    auto j = parse_json(fs::read_file(path), path.string());
    if (!j.is_object() || !j.contains("routes") || !j.at("routes").is_object()) {
        throw ConfigError(path.string() + ": expected an object with a 'routes' object");
    }
    for (const auto& [route, file] : j.at("routes").items()) {
        if (!file.is_string()) throw ConfigError(path.string() + ": route '" + route + "' must map to a file name");
        map.routes[resolve_site_path("/", route)] = file.get<std::string>();
    }
    return map;
}

std::string NavMap::file_for(const std::string& path) const {
    if (auto it = routes.find(path); it != routes.end()) return it->second;
    if (path.empty() || path.back() == '/') return path.substr(path.empty() ? 0 : 1) + "index.html";
    return path.substr(1);
}

OfflineEnvironment::OfflineEnvironment(std::filesystem::path snapshot_dir)
    : root_(std::move(snapshot_dir)), navmap_(NavMap::load(root_)) {
    if (!std::filesystem::is_directory(root_)) throw EnvironmentError("snapshot directory not found: " + root_.string());
}

OfflineEnvironment::Page OfflineEnvironment::load(const std::string& url) const {
    Page page;
    if (is_absolute_url(url)) {
        page.url = url;
        page.external = true;
        page.dom = html::parse_document("");
        return page;
    }
    page.url = resolve_site_path("/", url);
    auto file = root_ / navmap_.file_for(page.url);
    if (!std::filesystem::is_regular_file(file)) throw EnvironmentError("page load failure: " + page.url);
    page.source = fs::read_file(file);
    page.dom = html::parse_document(page.source);
    return page;
}

void OfflineEnvironment::open(const std::string& url) {
    page_ = load(url);
    history_.clear();
}

PageState OfflineEnvironment::observe() {
    if (!page_.dom) throw EnvironmentError("session has no open page");
    if (page_.external) {
        PageState s;
        s.url = page_.url;
        s.title = "(external site)";
        s.scroll_offset = page_.scroll;
        s.tabs.push_back({"1", s.url, s.title});
        return s;
    }
    return extract_page_state(current_html(), page_.url, page_.scroll);
}

std::string OfflineEnvironment::current_html() {
    if (page_.dirty) return html::serialize(*page_.dom);
    return page_.source;
}

std::string OfflineEnvironment::go_to(const std::string& url) {
    Page next;
    try {
        next = load(url);
    } catch (const EnvironmentError& e) {
        throw ActionError(e.what());
    }
    history_.push_back(std::move(page_));
    page_ = std::move(next);
    return page_.external ? "left the site for " + page_.url : "navigated to " + page_.url;
}

html::Node* OfflineEnvironment::target(const AgentAction& action) {
    auto elements = interactive_elements(*page_.dom);
    int idx = action.target_index.value_or(0);
    if (idx < 1 || static_cast<std::size_t>(idx) > elements.size()) {
        throw ActionError("unknown element index " + std::to_string(idx));
    }
    return elements[static_cast<std::size_t>(idx) - 1];
}

std::string OfflineEnvironment::click(html::Node& el) {
    if (el.has_attr("disabled")) return "clicked disabled " + quoted_text(el) + "; nothing happened";
    if (el.tag == "a") {
        auto href = text::trim(el.attr("href"));
        if (href.empty() || text::starts_with(text::to_lower(href), "javascript:")) {
            return "clicked " + quoted_text(el) + "; no navigation";
        }
        if (href.front() == '#') return "clicked " + quoted_text(el) + "; jumped to " + href;
        if (is_absolute_url(href)) return go_to(href);
        return go_to(resolve_site_path(page_.url, href));
    }
    if (el.tag == "input") {
        auto type = text::to_lower(el.attr("type"));
        if (type == "checkbox" || type == "radio") {
            bool checked = el.has_attr("checked");
            if (checked && type == "checkbox") el.remove_attr("checked");
            else if (!checked) el.attrs.push_back({"checked", "", false});
            page_.dirty = true;
            return (el.has_attr("checked") ? "checked " : "unchecked ") + quoted_text(el);
        }
    }
    bool submits = (el.tag == "button" && text::to_lower(el.attr("type")) != "button" &&
                    text::to_lower(el.attr("type")) != "reset") ||
                   (el.tag == "input" && (text::to_lower(el.attr("type")) == "submit" ||
                                          text::to_lower(el.attr("type")) == "image"));
    if (submits) {
        if (auto* form = enclosing_form(el)) {
            auto action = text::trim(form->attr("action"));
            if (action.empty()) return "submitted form; page unchanged";
            auto outcome = is_absolute_url(action) ? go_to(action) : go_to(resolve_site_path(page_.url, action));
            return "submitted form; " + outcome;
        }
    }
    return "clicked " + quoted_text(el) + "; page unchanged";
}

std::string OfflineEnvironment::type_into(html::Node& el, const std::string& value) {
    if (is_text_input(el)) {
        el.set_attr_raw("value", html::escape_attr(value));
        page_.dirty = true;
        return "typed \"" + value + "\" into " + quoted_text(el);
    }
    if (el.tag == "textarea") {
        el.children.clear();
        el.append_child(html::Node::make_text(html::escape_text(value)));
        page_.dirty = true;
        return "typed \"" + value + "\" into <textarea>";
    }
    if (el.tag == "select") {
        auto want = text::to_lower(text::trim(value));
        html::Node* chosen = nullptr;
        auto options = html::descendant_elements(el);
        for (auto* opt : options) {
            if (opt->tag != "option") continue;
            auto label = text::to_lower(text::collapse_whitespace(html::text_content(*opt)));
            if (label == want || (opt->has_attr("value") && text::to_lower(opt->attr("value")) == want)) {
                chosen = opt;
                break;
            }
        }
        if (!chosen) throw ActionError("no option \"" + value + "\" in <select>");
        for (auto* opt : options) {
            if (opt->tag == "option") opt->remove_attr("selected");
        }
        chosen->attrs.push_back({"selected", "", false});
        page_.dirty = true;
        return "selected \"" + text::collapse_whitespace(html::text_content(*chosen)) + "\"";
    }
    throw ActionError("element <" + el.tag + "> does not accept text input");
}

std::string OfflineEnvironment::execute(const AgentAction& action) {
    validate(action);
    if (!page_.dom) throw EnvironmentError("session has no open page");
    switch (action.kind) {
        case ActionKind::click:
            return click(*target(action));
        case ActionKind::type:
            return type_into(*target(action), *action.payload);
        case ActionKind::scroll: {
            int delta = scroll_delta(action);
            page_.scroll = std::max(0, page_.scroll + delta);
            return "scrolled " + std::string(delta >= 0 ? "down " : "up ") + std::to_string(delta >= 0 ? delta : -delta) +
                   "px to offset " + std::to_string(page_.scroll);
        }
        case ActionKind::navigate: {
            auto url = text::trim(*action.payload);
            return go_to(is_absolute_url(url) ? url : resolve_site_path(page_.url, url));
        }
        case ActionKind::go_back: {
            if (history_.empty()) throw ActionError("no history");
            page_ = std::move(history_.back());
            history_.pop_back();
            return "went back to " + page_.url;
        }
        case ActionKind::done:
            return *action.success ? "finished: goal reported achieved" : "finished: goal reported not achieved";
    }
    throw ActionError("unsupported action");
}

}  // namespace uxsim::env
