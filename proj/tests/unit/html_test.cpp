// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "support.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/html/parser.hpp"
#include "uxsim/html/selector.hpp"

using namespace uxsim;
using html::Selector;

namespace {

std::vector<std::string> ids_matching(const std::string& doc, const std::string& selector) {
    auto root = html::parse_document(doc);
    std::vector<std::string> out;
    for (auto* el : Selector::parse(selector).query_all(*root)) out.push_back(el->attr("id"));
    return out;
}

const char* kList = R"(<ul id="u"><li id="a" class="x">A</li><li id="b" class="x y">B</li><li id="c" lang="en-US">C</li><li id="d" data-k="hello world">D</li></ul><p id="p">P</p><p id="q">Q</p>)";

}  // namespace

TEST(Html, NormalizedSerialization) {
    auto root = html::parse_document("<DIV Class='a'   id=b><IMG SRC=\"x.png\"/><br></DIV>");
    EXPECT_EQ(html::serialize(*root), R"(<div class="a" id="b"><img src="x.png"><br></div>)");
}

TEST(Html, TextCommentAndDoctypeAreVerbatim) {
    std::string doc = "<!DOCTYPE html><!-- keep  me --><p>a &amp; b &lt;c&gt;</p>";
    auto root = html::parse_document(doc);
    EXPECT_EQ(html::serialize(*root), doc);
}

TEST(Html, ToleratesBrokenMarkup) {
    auto root = html::parse_document("<div><p>one<p>two</span></div><li>x");
    EXPECT_EQ(html::serialize(*root), "<div><p>one</p><p>two</p></div><li>x</li>");
}

TEST(Html, RawTextElementsAreNotParsed) {
    std::string doc = "<script>if (a < b && c > d) { x = '</p>'; }</script>";
    auto root = html::parse_document(doc);
    EXPECT_EQ(html::serialize(*root), doc);
}

TEST(Html, SerializeIsIdempotent) {
    auto once = html::serialize(*html::parse_document(testkit::load_fixture_text("fixtures/patch/base.html")));
    EXPECT_EQ(html::serialize(*html::parse_document(once)), once);
}

TEST(Html, StrictFragmentRejectsMalformedInput) {
    EXPECT_THROW(html::parse_fragment("", true), ParseError);
    EXPECT_THROW(html::parse_fragment("<div>open", true), ParseError);
    EXPECT_THROW(html::parse_fragment("</span>", true), ParseError);
    EXPECT_EQ(html::parse_fragment("<b>x</b><br>", true).size(), 2u);
}

TEST(Html, EntitiesAndText) {
    EXPECT_EQ(html::decode_entities("a &amp; &lt;b&gt; &#65;&#x42; &quot;"), "a & <b> AB \"");
    EXPECT_EQ(html::escape_text("a<b&c"), "a&lt;b&amp;c");
    EXPECT_EQ(html::escape_attr("say \"hi\""), "say &quot;hi&quot;");
    auto root = html::parse_document("<p>Keep <em>this</em> text.</p>");
    EXPECT_EQ(html::text_content(*root), "Keep this text.");
}

TEST(Selector, TypeIdClassAndAttributes) {
    EXPECT_EQ(ids_matching(kList, "li.x"), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(ids_matching(kList, ".x.y"), (std::vector<std::string>{"b"}));
    EXPECT_EQ(ids_matching(kList, "#c"), (std::vector<std::string>{"c"}));
    EXPECT_EQ(ids_matching(kList, "[lang|=en]"), (std::vector<std::string>{"c"}));
    EXPECT_EQ(ids_matching(kList, "[data-k~=world]"), (std::vector<std::string>{"d"}));
    EXPECT_EQ(ids_matching(kList, "[data-k^=hel]"), (std::vector<std::string>{"d"}));
    EXPECT_EQ(ids_matching(kList, "[data-k$=rld]"), (std::vector<std::string>{"d"}));
    EXPECT_EQ(ids_matching(kList, "[data-k*=\"o w\"]"), (std::vector<std::string>{"d"}));
    EXPECT_EQ(ids_matching(kList, "li[class]"), (std::vector<std::string>{"a", "b"}));
}

TEST(Selector, CombinatorsAndStructuralPseudoClasses) {
    EXPECT_EQ(ids_matching(kList, "ul > li:first-child"), (std::vector<std::string>{"a"}));
    EXPECT_EQ(ids_matching(kList, "li:last-child"), (std::vector<std::string>{"d"}));
    EXPECT_EQ(ids_matching(kList, "li:nth-child(odd)"), (std::vector<std::string>{"a", "c"}));
    EXPECT_EQ(ids_matching(kList, "li:nth-child(2n)"), (std::vector<std::string>{"b", "d"}));
    EXPECT_EQ(ids_matching(kList, "li:nth-child(-n+2)"), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(ids_matching(kList, "#a + li"), (std::vector<std::string>{"b"}));
    EXPECT_EQ(ids_matching(kList, "#b ~ li"), (std::vector<std::string>{"c", "d"}));
    EXPECT_EQ(ids_matching(kList, "ul ~ p"), (std::vector<std::string>{"p", "q"}));
    EXPECT_EQ(ids_matching(kList, "#q, #a"), (std::vector<std::string>{"a", "q"}));
    EXPECT_EQ(ids_matching(kList, "* > #d"), (std::vector<std::string>{"d"}));
}

TEST(Selector, UnsupportedSyntaxIsSelectorError) {
    for (const char* bad : {"", "li:hover", "a::before", "div >", "[x", "li:not(.x)", "#", "a:nth-child(foo)"}) {
        EXPECT_THROW(Selector::parse(bad), SelectorError) << bad;
    }
}

TEST(Selector, UniqueSelectorResolvesExactlyItsElement) {
    testkit::Rng rng(11);
    const std::vector<std::string> tags = {"div", "p", "span", "li", "section"};
    for (int iter = 0; iter < 100; ++iter) {
        // Random tree with duplicated ids and classes.
        std::string doc;
        std::function<void(int)> emit = [&](int depth) {
            int n = rng.uniform(1, 3);
            for (int i = 0; i < n; ++i) {
                const auto& tag = rng.pick(tags);
                doc += "<" + tag;
                if (rng.coin()) doc += " id=\"i" + std::to_string(rng.uniform(0, 3)) + "\"";
                if (rng.coin()) doc += " class=\"c" + std::to_string(rng.uniform(0, 2)) + "\"";
                doc += ">";
                if (depth < 3 && rng.coin()) emit(depth + 1);
                doc += "</" + tag + ">";
            }
        };
        emit(0);
        auto root = html::parse_document(doc);
        for (auto* el : html::descendant_elements(*root)) {
            auto sel = html::unique_selector(*el, *root);
            auto hits = Selector::parse(sel).query_all(*root);
            ASSERT_EQ(hits.size(), 1u) << sel << " in " << doc;
            EXPECT_EQ(hits[0], el) << sel;
        }
    }
}

TEST(Dom, PathRoundTrip) {
    auto root = html::parse_document(kList);
    for (auto* el : html::descendant_elements(*root)) {
        EXPECT_EQ(html::node_at(*root, html::path_of(*el)), el);
    }
}
