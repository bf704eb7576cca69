// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uxsim/html/dom.hpp"

namespace uxsim::html {

// A parsed CSS selector list. Supported: type and universal selectors, #id,
// .class, attribute selectors ([a], =, ~=, |=, ^=, $=, *=), descendant,
// child, adjacent and general sibling combinators, :nth-child(an+b | odd |
// even), :first-child, :last-child, :root (an element without an element
// parent), and comma-separated lists. Anything
// else is a SelectorError.
class Selector {
public:
    static Selector parse(std::string_view source);

    bool matches(const Node& element) const;
    // Matching elements below `root` in document order.
    std::vector<Node*> query_all(Node& root) const;
    Node* query_first(Node& root) const;

    const std::string& source() const { return source_; }

    struct AttrTest {
        std::string name;
        char op = 0;  // 0 = presence, '=', '~', '|', '^', '$', '*'
        std::string value;
    };
    struct Compound {
        std::string type;  // empty = any
        std::vector<std::string> ids;
        std::vector<std::string> classes;
        std::vector<AttrTest> attrs;
        // nth-child(a*n + b); first-child is (0, 1); last-child sets from_end.
        struct Nth {
            long a = 0;
            long b = 1;
            bool from_end = false;
        };
        std::vector<Nth> nth;
        bool root = false;  // :root, no element parent
    };
    struct Complex {
        std::vector<Compound> compounds;
        std::vector<char> combinators;  // between compounds: ' ', '>', '+', '~'
    };

private:
    std::string source_;
    std::vector<Complex> alternatives_;
};

// A selector that resolves to exactly `el` in its document: "#id" when the id
// is unique and a plain identifier, otherwise a ":nth-child" chain anchored
// at the nearest such id or at a top-level element.
std::string unique_selector(const Node& el, Node& root);

}  // namespace uxsim::html
