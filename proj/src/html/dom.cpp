// SPDX-License-Identifier: Apache-2.0

#include "uxsim/html/dom.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <utility>

namespace uxsim::html {

NodePtr Node::make_document() { return std::make_unique<Node>(NodeKind::document); }

NodePtr Node::make_element(std::string tag) {
    auto n = std::make_unique<Node>(NodeKind::element);
    n->tag = std::move(tag);
    return n;
}

NodePtr Node::make_text(std::string data) {
    auto n = std::make_unique<Node>(NodeKind::text);
    n->data = std::move(data);
    return n;
}

NodePtr Node::make_comment(std::string data) {
    auto n = std::make_unique<Node>(NodeKind::comment);
    n->data = std::move(data);
    return n;
}

NodePtr Node::make_doctype(std::string data) {
    auto n = std::make_unique<Node>(NodeKind::doctype);
    n->data = std::move(data);
    return n;
}

const Attribute* Node::find_attr(std::string_view name) const {
    for (const auto& a : attrs) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

std::string Node::attr(std::string_view name) const {
    const auto* a = find_attr(name);
    return a ? decode_entities(a->value) : std::string{};
}

void Node::set_attr_raw(std::string_view name, std::string raw_value) {
    for (auto& a : attrs) {
        if (a.name == name) {
            a.value = std::move(raw_value);
            a.has_value = true;
            return;
        }
    }
    attrs.push_back({std::string(name), std::move(raw_value), true});
}

void Node::remove_attr(std::string_view name) {
    attrs.erase(std::remove_if(attrs.begin(), attrs.end(), [&](const Attribute& a) { return a.name == name; }),
                attrs.end());
}

Node* Node::append_child(NodePtr child) {
    child->parent = this;
    children.push_back(std::move(child));
    return children.back().get();
}

Node* Node::insert_child(std::size_t index, NodePtr child) {
    child->parent = this;
    auto it = children.insert(children.begin() + static_cast<std::ptrdiff_t>(index), std::move(child));
    return it->get();
}

NodePtr Node::remove_child(std::size_t index) {
    auto n = std::move(children[index]);
    children.erase(children.begin() + static_cast<std::ptrdiff_t>(index));
    n->parent = nullptr;
    return n;
}

std::size_t Node::index_in_parent() const {
    if (!parent) return npos;
    for (std::size_t i = 0; i < parent->children.size(); ++i) {
        if (parent->children[i].get() == this) return i;
    }
    return npos;
}

std::vector<Node*> Node::element_children() const {
    std::vector<Node*> out;
    for (const auto& c : children) {
        if (c->is_element()) out.push_back(c.get());
    }
    return out;
}

bool is_void_element(std::string_view tag) {
    static constexpr std::array<std::string_view, 14> kVoid = {"area", "base",  "br",   "col",  "embed",
                                                                "hr",   "img",   "input", "link", "meta",
                                                                "param", "source", "track", "wbr"};
    return std::find(kVoid.begin(), kVoid.end(), tag) != kVoid.end();
}

bool is_raw_text_element(std::string_view tag) {
    return tag == "script" || tag == "style" || tag == "textarea" || tag == "title";
}

namespace {

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x110000) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

struct NamedEntity {
    std::string_view name;
    unsigned long cp;
};

constexpr std::array<NamedEntity, 20> kEntities = {{
    {"amp", '&'},      {"lt", '<'},        {"gt", '>'},        {"quot", '"'},      {"apos", '\''},
    {"nbsp", 0xA0},    {"copy", 0xA9},     {"reg", 0xAE},      {"hellip", 0x2026}, {"mdash", 0x2014},
    {"ndash", 0x2013}, {"rsquo", 0x2019},  {"lsquo", 0x2018},  {"ldquo", 0x201C},  {"rdquo", 0x201D},
    {"euro", 0x20AC},  {"pound", 0xA3},    {"times", 0xD7},    {"middot", 0xB7},   {"trade", 0x2122},
}};

void text_content_into(const Node& n, std::string& out) {
    if (n.kind == NodeKind::text) {
        out += decode_entities(n.data);
        return;
    }
    if (n.kind == NodeKind::element && (n.tag == "script" || n.tag == "style")) return;
    for (const auto& c : n.children) text_content_into(*c, out);
}

void collect_elements(Node& n, std::vector<Node*>& out) {
    for (auto& c : n.children) {
        if (c->is_element()) {
            out.push_back(c.get());
            collect_elements(*c, out);
        }
    }
}

}  // namespace

std::string decode_entities(std::string_view s) {
    if (s.find('&') == std::string_view::npos) return std::string(s);
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(s[i++]);
            continue;
        }
        auto body = s.substr(i + 1, semi - i - 1);
        bool done = false;
        if (!body.empty() && body[0] == '#') {
            unsigned long cp = 0;
            std::from_chars_result r{};
            if (body.size() > 1 && (body[1] == 'x' || body[1] == 'X')) {
                r = std::from_chars(body.data() + 2, body.data() + body.size(), cp, 16);
            } else {
                r = std::from_chars(body.data() + 1, body.data() + body.size(), cp, 10);
            }
            if (r.ec == std::errc{} && r.ptr == body.data() + body.size() && cp > 0) {
                append_utf8(out, cp);
                done = true;
            }
        } else {
            for (const auto& e : kEntities) {
                if (e.name == body) {
                    append_utf8(out, e.cp);
                    done = true;
                    break;
                }
            }
        }
        if (done) {
            i = semi + 1;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

std::string escape_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string escape_attr(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string text_content(const Node& node) {
    std::string out;
    text_content_into(node, out);
    return out;
}

NodePtr clone(const Node& node) {
    auto n = std::make_unique<Node>(node.kind);
    n->tag = node.tag;
    n->attrs = node.attrs;
    n->data = node.data;
    n->src_begin = node.src_begin;
    n->src_end = node.src_end;
    for (const auto& c : node.children) n->append_child(clone(*c));
    return n;
}

std::vector<std::size_t> path_of(const Node& node) {
    std::vector<std::size_t> path;
    for (const Node* n = &node; n->parent; n = n->parent) path.push_back(n->index_in_parent());
    std::reverse(path.begin(), path.end());
    return path;
}

Node* node_at(Node& root, const std::vector<std::size_t>& path) {
    Node* n = &root;
    for (auto idx : path) {
        if (idx >= n->children.size()) return nullptr;
        n = n->children[idx].get();
    }
    return n;
}

std::vector<Node*> descendant_elements(Node& root) {
    std::vector<Node*> out;
    collect_elements(root, out);
    return out;
}

}  // namespace uxsim::html
