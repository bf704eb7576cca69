// SPDX-License-Identifier: Apache-2.0

#include "uxsim/html/selector.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "uxsim/common/error.hpp"
#include "uxsim/common/text.hpp"

namespace uxsim::html {

namespace {

bool is_ident_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '-' || u >= 0x80;
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

class SelectorParser {
public:
    explicit SelectorParser(std::string_view s) : s_(s) {}

    std::vector<Selector::Complex> parse_list() {
        std::vector<Selector::Complex> out;
        while (true) {
            skip_ws();
            out.push_back(parse_complex());
            skip_ws();
            if (i_ >= s_.size()) break;
            if (s_[i_] != ',') error("unexpected '" + std::string(1, s_[i_]) + "'");
            ++i_;
        }
        return out;
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        throw SelectorError("invalid selector '" + std::string(s_) + "': " + what);
    }

    void skip_ws() {
        while (i_ < s_.size() && is_ws(s_[i_])) ++i_;
    }

    bool at_end() const { return i_ >= s_.size(); }

    std::string ident() {
        std::string out;
        while (i_ < s_.size()) {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
                out.push_back(s_[i_ + 1]);
                i_ += 2;
            } else if (is_ident_char(s_[i_])) {
                out.push_back(s_[i_++]);
            } else {
                break;
            }
        }
        if (out.empty()) error("expected identifier");
        return out;
    }

    std::string quoted() {
        char q = s_[i_++];
        std::string out;
        while (i_ < s_.size() && s_[i_] != q) {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
            out.push_back(s_[i_++]);
        }
        if (at_end()) error("unterminated string");
        ++i_;
        return out;
    }

    Selector::Complex parse_complex() {
        Selector::Complex cx;
        cx.compounds.push_back(parse_compound());
        while (true) {
            bool had_ws = i_ < s_.size() && is_ws(s_[i_]);
            skip_ws();
            if (at_end() || s_[i_] == ',') break;
            char comb = ' ';
            if (s_[i_] == '>' || s_[i_] == '+' || s_[i_] == '~') {
                comb = s_[i_++];
                skip_ws();
            } else if (!had_ws) {
                error("unexpected '" + std::string(1, s_[i_]) + "'");
            }
            if (at_end()) error("dangling combinator");
            cx.combinators.push_back(comb);
            cx.compounds.push_back(parse_compound());
        }
        return cx;
    }

    Selector::Compound parse_compound() {
        Selector::Compound c;
        bool any = false;
        if (!at_end() && s_[i_] == '*') {
            ++i_;
            any = true;
        } else if (!at_end() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) {
            c.type = text::to_lower(ident());
            any = true;
        }
        while (!at_end()) {
            char ch = s_[i_];
            if (ch == '#') {
                ++i_;
                c.ids.push_back(ident());
            } else if (ch == '.') {
                ++i_;
                c.classes.push_back(ident());
            } else if (ch == '[') {
                ++i_;
                c.attrs.push_back(parse_attr());
            } else if (ch == ':') {
                ++i_;
                parse_pseudo(c);
            } else {
                break;
            }
            any = true;
        }
        if (!any) error(at_end() ? "unexpected end" : "unexpected '" + std::string(1, s_[i_]) + "'");
        return c;
    }

    Selector::AttrTest parse_attr() {
        Selector::AttrTest t;
        skip_ws();
        t.name = text::to_lower(ident());
        skip_ws();
        if (at_end()) error("unterminated attribute selector");
        if (s_[i_] == ']') {
            ++i_;
            return t;
        }
        if (s_[i_] == '=') {
            t.op = '=';
            ++i_;
        } else if (std::string_view("~|^$*").find(s_[i_]) != std::string_view::npos && i_ + 1 < s_.size() &&
                   s_[i_ + 1] == '=') {
            t.op = s_[i_];
            i_ += 2;
        } else {
            error("bad attribute operator");
        }
        skip_ws();
        if (at_end()) error("missing attribute value");
        t.value = (s_[i_] == '"' || s_[i_] == '\'') ? quoted() : ident();
        skip_ws();
        if (at_end() || s_[i_] != ']') error("expected ']'");
        ++i_;
        return t;
    }

    void parse_pseudo(Selector::Compound& c) {
        if (!at_end() && s_[i_] == ':') error("pseudo-elements are not supported");
        auto name = text::to_lower(ident());
        if (name == "first-child") {
            c.nth.push_back({0, 1, false});
        } else if (name == "last-child") {
            c.nth.push_back({0, 1, true});
        } else if (name == "root") {
            c.root = true;
        } else if (name == "nth-child" || name == "nth-last-child") {
            if (at_end() || s_[i_] != '(') error("expected '(' after :" + name);
            auto close = s_.find(')', i_);
            if (close == std::string_view::npos) error("expected ')'");
            auto nth = parse_nth(s_.substr(i_ + 1, close - i_ - 1));
            nth.from_end = name == "nth-last-child";
            c.nth.push_back(nth);
            i_ = close + 1;
        } else {
            error("unsupported pseudo-class :" + name);
        }
    }

    Selector::Compound::Nth parse_nth(std::string_view raw) {
        std::string s;
        for (char ch : raw) {
            if (!is_ws(ch)) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
        if (s == "odd") return {2, 1, false};
        if (s == "even") return {2, 0, false};
        auto to_long = [&](std::string_view v, long& out) {
            if (!v.empty() && v[0] == '+') v.remove_prefix(1);
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            return ec == std::errc{} && p == v.data() + v.size() && !v.empty();
        };
        Selector::Compound::Nth nth;
        auto npos = s.find('n');
        if (npos == std::string::npos) {
            nth.a = 0;
            if (!to_long(s, nth.b)) error("bad :nth-child argument '" + std::string(raw) + "'");
            return nth;
        }
        auto a_part = s.substr(0, npos);
        if (a_part.empty() || a_part == "+") nth.a = 1;
        else if (a_part == "-") nth.a = -1;
        else if (!to_long(a_part, nth.a)) error("bad :nth-child argument '" + std::string(raw) + "'");
        auto b_part = s.substr(npos + 1);
        nth.b = 0;
        if (!b_part.empty()) {
            if (b_part[0] != '+' && b_part[0] != '-') error("bad :nth-child argument '" + std::string(raw) + "'");
            if (!to_long(b_part, nth.b)) error("bad :nth-child argument '" + std::string(raw) + "'");
        }
        return nth;
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

bool has_token(std::string_view list, std::string_view token) {
    for (const auto& t : text::split(text::collapse_whitespace(list), ' ')) {
        if (t == token) return true;
    }
    return false;
}

bool match_attr(const Node& el, const Selector::AttrTest& t) {
    const auto* a = el.find_attr(t.name);
    if (!a) return false;
    if (t.op == 0) return true;
    auto v = decode_entities(a->value);
    switch (t.op) {
        case '=': return v == t.value;
        case '~': return has_token(v, t.value);
        case '|': return v == t.value || text::starts_with(v, t.value + "-");
        case '^': return !t.value.empty() && text::starts_with(v, t.value);
        case '$': return !t.value.empty() && text::ends_with(v, t.value);
        case '*': return !t.value.empty() && v.find(t.value) != std::string::npos;
    }
    return false;
}

bool match_nth(const Node& el, const Selector::Compound::Nth& nth) {
    if (!el.parent) return false;
    auto siblings = el.parent->element_children();
    auto it = std::find(siblings.begin(), siblings.end(), &el);
    long pos = static_cast<long>(it - siblings.begin()) + 1;
    if (nth.from_end) pos = static_cast<long>(siblings.size()) - pos + 1;
    if (nth.a == 0) return pos == nth.b;
    long diff = pos - nth.b;
    return diff % nth.a == 0 && diff / nth.a >= 0;
}

bool match_compound(const Node& el, const Selector::Compound& c) {
    if (!el.is_element()) return false;
    if (!c.type.empty() && el.tag != c.type) return false;
    for (const auto& id : c.ids) {
        const auto* a = el.find_attr("id");
        if (!a || decode_entities(a->value) != id) return false;
    }
    if (!c.classes.empty()) {
        auto cls = el.attr("class");
        for (const auto& k : c.classes) {
            if (!has_token(cls, k)) return false;
        }
    }
    for (const auto& t : c.attrs) {
        if (!match_attr(el, t)) return false;
    }
    for (const auto& n : c.nth) {
        if (!match_nth(el, n)) return false;
    }
    if (c.root && el.parent && el.parent->is_element()) return false;
    return true;
}

const Node* previous_element(const Node& el) {
    if (!el.parent) return nullptr;
    const Node* prev = nullptr;
    for (const auto& c : el.parent->children) {
        if (c.get() == &el) return prev;
        if (c->is_element()) prev = c.get();
    }
    return nullptr;
}

bool match_complex(const Selector::Complex& cx, std::size_t idx, const Node& el) {
    if (!match_compound(el, cx.compounds[idx])) return false;
    if (idx == 0) return true;
    switch (cx.combinators[idx - 1]) {
        case ' ':
            for (const Node* p = el.parent; p && p->is_element(); p = p->parent) {
                if (match_complex(cx, idx - 1, *p)) return true;
            }
            return false;
        case '>':
            return el.parent && el.parent->is_element() && match_complex(cx, idx - 1, *el.parent);
        case '+': {
            const Node* prev = previous_element(el);
            return prev && match_complex(cx, idx - 1, *prev);
        }
        case '~':
            for (const Node* prev = previous_element(el); prev; prev = previous_element(*prev)) {
                if (match_complex(cx, idx - 1, *prev)) return true;
            }
            return false;
    }
    return false;
}

bool plain_identifier(std::string_view s) {
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-') return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

}  // namespace

Selector Selector::parse(std::string_view source) {
    if (text::trim(source).empty()) throw SelectorError("empty selector");
    Selector s;
    s.source_ = std::string(source);
    s.alternatives_ = SelectorParser(source).parse_list();
    return s;
}

bool Selector::matches(const Node& element) const {
    for (const auto& cx : alternatives_) {
        if (match_complex(cx, cx.compounds.size() - 1, element)) return true;
    }
    return false;
}

std::vector<Node*> Selector::query_all(Node& root) const {
    std::vector<Node*> out;
    for (Node* el : descendant_elements(root)) {
        if (matches(*el)) out.push_back(el);
    }
    return out;
}

Node* Selector::query_first(Node& root) const {
    for (Node* el : descendant_elements(root)) {
        if (matches(*el)) return el;
    }
    return nullptr;
}

std::string unique_selector(const Node& el, Node& root) {
    auto id_anchor = [&](const Node& n) -> std::string {
        auto id = n.attr("id");
        if (!plain_identifier(id)) return {};
        auto sel = "#" + id;
        return Selector::parse(sel).query_all(root).size() == 1 ? sel : std::string{};
    };
    std::vector<std::string> parts;
    for (const Node* n = &el; n && n->is_element(); n = n->parent) {
        if (auto anchor = id_anchor(*n); !anchor.empty()) {
            parts.push_back(anchor);
            break;
        }
        auto siblings = n->parent ? n->parent->element_children() : std::vector<Node*>{};
        auto pos = std::find(siblings.begin(), siblings.end(), n) - siblings.begin() + 1;
        parts.push_back(n->tag + ":nth-child(" + std::to_string(pos) + ")");
        // An unanchored chain must start at the top level.
        if (!n->parent || !n->parent->is_element()) parts.back() += ":root";
    }
    std::string out;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        if (!out.empty()) out += " > ";
        out += *it;
    }
    return out;
}

}  // namespace uxsim::html
