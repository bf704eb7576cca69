// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uxsim/html/dom.hpp"

namespace uxsim::html {

// Error-tolerant parse into a source-faithful tree. No implied html/head/body
// elements are synthesized; stray end tags are dropped; unclosed elements are
// closed at their parent's end or at EOF; common optional end tags (p, li,
// option, dt/dd, tr/td/th) close implicitly.
NodePtr parse_document(std::string_view html);

// Parses a fragment for splicing. Strict mode (used by the patch engine)
// rejects empty input, stray end tags and unclosed non-void elements with a
// ParseError.
std::vector<NodePtr> parse_fragment(std::string_view html, bool strict);

// Normalized serialization: lowercase names, double-quoted attributes in
// source order, single spaces between attributes, void elements without a
// self-closing slash, explicit end tags for every non-void element. Text,
// comment and doctype bytes are emitted verbatim.
std::string serialize(const Node& node);
std::string serialize_children(const Node& node);

}  // namespace uxsim::html
