// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace uxsim::html {

enum class NodeKind { document, element, text, comment, doctype };

// Attribute values are kept as they appear in the source (entities not
// decoded) so an unmodified document re-serializes to the same bytes.
struct Attribute {
    std::string name;
    std::string value;
    bool has_value = true;
};

class Node;
using NodePtr = std::unique_ptr<Node>;

class Node {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    explicit Node(NodeKind kind) : kind(kind) {}

    static NodePtr make_document();
    static NodePtr make_element(std::string tag);
    static NodePtr make_text(std::string data);
    static NodePtr make_comment(std::string data);
    static NodePtr make_doctype(std::string data);

    NodeKind kind;
    std::string tag;                // element only, lowercase
    std::vector<Attribute> attrs;   // element only, source order
    std::string data;               // text / comment / doctype, raw
    std::vector<NodePtr> children;
    Node* parent = nullptr;

    // Byte span of the element in the parsed source; npos for nodes created
    // after parsing.
    std::size_t src_begin = npos;
    std::size_t src_end = npos;

    bool is_element() const { return kind == NodeKind::element; }

    const Attribute* find_attr(std::string_view name) const;
    bool has_attr(std::string_view name) const { return find_attr(name) != nullptr; }
    // Entity-decoded attribute value; empty when absent.
    std::string attr(std::string_view name) const;
    // Sets a raw (already escaped) value, replacing in place or appending.
    void set_attr_raw(std::string_view name, std::string raw_value);
    void remove_attr(std::string_view name);

    Node* append_child(NodePtr child);
    Node* insert_child(std::size_t index, NodePtr child);
    NodePtr remove_child(std::size_t index);
    std::size_t index_in_parent() const;

    std::vector<Node*> element_children() const;
};

bool is_void_element(std::string_view tag);
// Elements whose content is raw text (no markup, no escaping).
bool is_raw_text_element(std::string_view tag);

std::string decode_entities(std::string_view s);
std::string escape_text(std::string_view s);
std::string escape_attr(std::string_view s);

// Concatenated, entity-decoded text of the subtree (scripts/styles skipped).
std::string text_content(const Node& node);

NodePtr clone(const Node& node);

// Child-index path from the root; stable across re-parses of the same bytes.
std::vector<std::size_t> path_of(const Node& node);
Node* node_at(Node& root, const std::vector<std::size_t>& path);

// Elements in document order (pre-order), excluding `root` itself.
std::vector<Node*> descendant_elements(Node& root);

}  // namespace uxsim::html
