// SPDX-License-Identifier: Apache-2.0

#include "uxsim/html/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "uxsim/common/error.hpp"
#include "uxsim/common/text.hpp"

namespace uxsim::html {

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool closes_paragraph(std::string_view tag) {
    static constexpr std::array<std::string_view, 27> kBlocks = {
        "address", "article", "aside", "blockquote", "details", "div",    "dl",     "fieldset", "figure",
        "footer",  "form",    "h1",    "h2",         "h3",      "h4",     "h5",     "h6",       "header",
        "hr",      "main",    "menu",  "nav",        "ol",      "p",      "pre",    "section",  "table"};
    return tag == "ul" || std::find(kBlocks.begin(), kBlocks.end(), tag) != kBlocks.end();
}

class TreeBuilder {
public:
    TreeBuilder(std::string_view src, bool strict) : src_(src), strict_(strict), root_(Node::make_document()) {
        stack_.push_back(root_.get());
    }

    NodePtr run() {
        std::size_t pos = 0;
        std::size_t text_start = 0;
        const std::size_t n = src_.size();
        auto flush_text = [&](std::size_t upto) {
            if (upto > text_start) top()->append_child(Node::make_text(std::string(src_.substr(text_start, upto - text_start))));
        };

        while (pos < n) {
            if (src_[pos] != '<') {
                auto next = src_.find('<', pos);
                pos = next == std::string_view::npos ? n : next;
                continue;
            }
            if (src_.substr(pos, 4) == "<!--") {
                flush_text(pos);
                auto end = src_.find("-->", pos + 4);
                if (end == std::string_view::npos) {
                    fail("unterminated comment");
                    top()->append_child(Node::make_comment(std::string(src_.substr(pos + 4))));
                    pos = text_start = n;
                } else {
                    top()->append_child(Node::make_comment(std::string(src_.substr(pos + 4, end - pos - 4))));
                    pos = text_start = end + 3;
                }
                continue;
            }
            if (src_.substr(pos, 2) == "<!") {
                auto end = src_.find('>', pos);
                if (end == std::string_view::npos) {
                    fail("unterminated declaration");
                    ++pos;
                    continue;
                }
                flush_text(pos);
                top()->append_child(Node::make_doctype(std::string(src_.substr(pos + 2, end - pos - 2))));
                pos = text_start = end + 1;
                continue;
            }
            if (pos + 2 < n && src_[pos + 1] == '/' && is_alpha(src_[pos + 2])) {
                auto end = src_.find('>', pos);
                if (end == std::string_view::npos) {
                    fail("unterminated end tag");
                    ++pos;
                    continue;
                }
                flush_text(pos);
                std::size_t i = pos + 2;
                while (i < end && !is_ws(src_[i]) && src_[i] != '/') ++i;
                handle_end(text::to_lower(src_.substr(pos + 2, i - pos - 2)), pos, end + 1);
                pos = text_start = end + 1;
                continue;
            }
            if (pos + 1 < n && is_alpha(src_[pos + 1])) {
                StartTag tag;
                if (!scan_start_tag(pos, tag)) {
                    fail("unterminated start tag");
                    ++pos;
                    continue;
                }
                flush_text(pos);
                Node* el = handle_start(tag, pos);
                pos = text_start = tag.end;
                if (el && is_raw_text_element(el->tag)) {
                    auto close = find_raw_end(el->tag, pos);
                    if (close == std::string_view::npos) {
                        fail("unterminated <" + el->tag + ">");
                        close = n;
                    }
                    if (close > pos) el->append_child(Node::make_text(std::string(src_.substr(pos, close - pos))));
                    pos = text_start = close;
                }
                continue;
            }
            ++pos;  // literal '<'
        }
        flush_text(n);
        if (stack_.size() > 1) fail("unclosed <" + top()->tag + ">");
        pop_to(1, n);
        return std::move(root_);
    }

private:
    struct StartTag {
        std::string name;
        std::vector<Attribute> attrs;
        bool self_closing = false;
        std::size_t end = 0;
    };

    Node* top() { return stack_.back(); }

    void fail(const std::string& msg) {
        if (strict_) throw ParseError("HTML fragment: " + msg);
    }

    bool scan_start_tag(std::size_t pos, StartTag& out) {
        const std::size_t n = src_.size();
        std::size_t i = pos + 1;
        while (i < n && !is_ws(src_[i]) && src_[i] != '/' && src_[i] != '>') ++i;
        out.name = text::to_lower(src_.substr(pos + 1, i - pos - 1));
        while (i < n) {
            while (i < n && is_ws(src_[i])) ++i;
            if (i >= n) return false;
            if (src_[i] == '>') {
                out.end = i + 1;
                return true;
            }
            if (src_[i] == '/') {
                if (i + 1 < n && src_[i + 1] == '>') {
                    out.self_closing = true;
                    out.end = i + 2;
                    return true;
                }
                ++i;
                continue;
            }
            std::size_t name_start = i;
            while (i < n && !is_ws(src_[i]) && src_[i] != '=' && src_[i] != '>' &&
                   !(src_[i] == '/' && i + 1 < n && src_[i + 1] == '>')) {
                ++i;
            }
            if (i == name_start) {  // stray '='
                ++i;
                continue;
            }
            Attribute attr;
            attr.name = text::to_lower(src_.substr(name_start, i - name_start));
            attr.has_value = false;
            std::size_t j = i;
            while (j < n && is_ws(src_[j])) ++j;
            if (j < n && src_[j] == '=') {
                ++j;
                while (j < n && is_ws(src_[j])) ++j;
                if (j >= n) return false;
                attr.has_value = true;
                if (src_[j] == '"' || src_[j] == '\'') {
                    auto close = src_.find(src_[j], j + 1);
                    if (close == std::string_view::npos) return false;
                    attr.value = std::string(src_.substr(j + 1, close - j - 1));
                    i = close + 1;
                } else {
                    std::size_t v = j;
                    while (v < n && !is_ws(src_[v]) && src_[v] != '>') ++v;
                    attr.value = std::string(src_.substr(j, v - j));
                    i = v;
                }
            }
            auto dup = std::find_if(out.attrs.begin(), out.attrs.end(),
                                    [&](const Attribute& a) { return a.name == attr.name; });
            if (dup == out.attrs.end()) out.attrs.push_back(std::move(attr));
        }
        return false;
    }

    std::size_t find_raw_end(const std::string& tag, std::size_t from) const {
        auto needle = "</" + tag;
        for (std::size_t i = src_.find("</", from); i != std::string_view::npos; i = src_.find("</", i + 2)) {
            if (text::to_lower(src_.substr(i, needle.size())) == needle) {
                auto after = i + needle.size();
                if (after >= src_.size() || is_ws(src_[after]) || src_[after] == '>' || src_[after] == '/') return i;
            }
        }
        return std::string_view::npos;
    }

    // Index in stack_ of the nearest open `names` element above any `bounds`.
    std::size_t find_open(std::initializer_list<std::string_view> names,
                          std::initializer_list<std::string_view> bounds) const {
        for (std::size_t k = stack_.size() - 1; k >= 1; --k) {
            const auto& t = stack_[k]->tag;
            if (std::find(names.begin(), names.end(), t) != names.end()) return k;
            if (std::find(bounds.begin(), bounds.end(), t) != bounds.end()) return 0;
        }
        return 0;
    }

    void pop_to(std::size_t k, std::size_t end_pos) {
        while (stack_.size() > k) {
            if (stack_.back()->src_end == Node::npos) stack_.back()->src_end = end_pos;
            stack_.pop_back();
        }
    }

    void apply_implied_ends(const std::string& tag, std::size_t pos) {
        if (top()->tag == "p" && closes_paragraph(tag)) pop_to(stack_.size() - 1, pos);
        std::size_t k = 0;
        if (tag == "li") k = find_open({"li"}, {"ul", "ol", "menu"});
        else if (tag == "dt" || tag == "dd") k = find_open({"dt", "dd"}, {"dl"});
        else if (tag == "option") k = top()->tag == "option" ? stack_.size() - 1 : 0;
        else if (tag == "optgroup") k = find_open({"option", "optgroup"}, {"select"});
        else if (tag == "tr") k = find_open({"tr"}, {"table", "thead", "tbody", "tfoot"});
        else if (tag == "td" || tag == "th") k = find_open({"td", "th"}, {"tr", "table"});
        else if (tag == "thead" || tag == "tbody" || tag == "tfoot") k = find_open({"thead", "tbody", "tfoot"}, {"table"});
        if (k > 0) pop_to(k, pos);
    }

    Node* handle_start(StartTag& tag, std::size_t pos) {
        apply_implied_ends(tag.name, pos);
        auto el = Node::make_element(tag.name);
        el->attrs = std::move(tag.attrs);
        el->src_begin = pos;
        Node* raw = top()->append_child(std::move(el));
        if (is_void_element(raw->tag) || tag.self_closing) {
            raw->src_end = tag.end;
            return nullptr;
        }
        stack_.push_back(raw);
        return raw;
    }

    void handle_end(const std::string& tag, std::size_t begin, std::size_t end) {
        if (is_void_element(tag)) return;
        for (std::size_t k = stack_.size() - 1; k >= 1; --k) {
            if (stack_[k]->tag == tag) {
                if (k != stack_.size() - 1) fail("mismatched </" + tag + "> closes <" + top()->tag + ">");
                stack_[k]->src_end = end;
                pop_to(k + 1, begin);
                stack_.pop_back();
                return;
            }
        }
        fail("stray </" + tag + ">");
    }

    std::string_view src_;
    bool strict_;
    NodePtr root_;
    std::vector<Node*> stack_;
};

void serialize_into(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::document:
            for (const auto& c : n.children) serialize_into(*c, out);
            return;
        case NodeKind::text:
            out += n.data;
            return;
        case NodeKind::comment:
            out += "<!--";
            out += n.data;
            out += "-->";
            return;
        case NodeKind::doctype:
            out += "<!";
            out += n.data;
            out += ">";
            return;
        case NodeKind::element:
            break;
    }
    out += "<";
    out += n.tag;
    for (const auto& a : n.attrs) {
        out += " ";
        out += a.name;
        if (!a.has_value) continue;
        out += "=\"";
        for (char c : a.value) {
            if (c == '"') out += "&quot;";
            else out.push_back(c);
        }
        out += "\"";
    }
    out += ">";
    if (is_void_element(n.tag)) return;
    for (const auto& c : n.children) serialize_into(*c, out);
    out += "</";
    out += n.tag;
    out += ">";
}

}  // namespace

NodePtr parse_document(std::string_view html) { return TreeBuilder(html, false).run(); }

std::vector<NodePtr> parse_fragment(std::string_view html, bool strict) {
    if (strict && text::trim(html).empty()) throw ParseError("HTML fragment: empty");
    auto root = TreeBuilder(html, strict).run();
    std::vector<NodePtr> out;
    while (!root->children.empty()) out.push_back(root->remove_child(0));
    std::vector<Node*> work;
    for (auto& n : out) work.push_back(n.get());
    while (!work.empty()) {
        Node* n = work.back();
        work.pop_back();
        n->src_begin = n->src_end = Node::npos;
        for (auto& c : n->children) work.push_back(c.get());
    }
    return out;
}

std::string serialize(const Node& node) {
    std::string out;
    serialize_into(node, out);
    return out;
}

std::string serialize_children(const Node& node) {
    std::string out;
    for (const auto& c : node.children) serialize_into(*c, out);
    return out;
}

}  // namespace uxsim::html
