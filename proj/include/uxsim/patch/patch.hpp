// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uxsim/common/error.hpp"
#include "uxsim/common/json.hpp"

namespace uxsim::patch {

inline constexpr std::string_view kMarkerStart = "<!--TARGET-START-->";
inline constexpr std::string_view kMarkerEnd = "<!--TARGET-END-->";

// Id of the single style element owned by inject_style.
inline constexpr std::string_view kEngineStyleId = "patch-engine-style";

// A selector that matched more than one element.
class AmbiguousTargetError : public PatchError {
public:
    AmbiguousTargetError(const std::string& what, std::size_t count) : PatchError(what), count(count) {}
    std::size_t count;
};

struct Target {
    enum class Kind { css_selector, marker_pair, snippet };
    Kind kind = Kind::css_selector;
    std::string value;  // selector or snippet; unused for marker_pair

    static Target selector(std::string s) { return {Kind::css_selector, std::move(s)}; }
    static Target markers() { return {Kind::marker_pair, {}}; }
    static Target snippet(std::string s) { return {Kind::snippet, std::move(s)}; }
};

struct Resolved {
    std::vector<std::size_t> path;  // child-index path in the parsed document
    std::string outer_html;         // normalized serialization of the element
};
struct Ambiguous {
    std::size_t count = 0;
};
struct NotFound {};

using Resolution = std::variant<Resolved, Ambiguous, NotFound>;

// Markers in the document win; otherwise the target's own variant decides.
// A selector must match exactly one element; a snippet must occur exactly
// once and start an element. Invalid selector syntax throws SelectorError.
Resolution resolve_target(std::string_view html, const Target& target);

enum class Action {
    replace_text,
    set_attribute,
    remove_attribute,
    add_class,
    remove_class,
    insert_before,
    insert_after,
    replace_element,
    remove_element,
    append_child,
    inject_style,
};

std::string_view to_string(Action action);
// Throws ValidationError for names outside the action set.
Action action_from_string(std::string_view s);
bool is_attribute_action(Action action);

struct Patch {
    std::string selector;
    Action action = Action::replace_text;
    std::string value;
    std::optional<std::string> name;  // attribute actions only
    std::string rationale;

    bool operator==(const Patch&) const = default;
};

enum class Status { ok, ambiguous, impossible };

std::string_view to_string(Status status);

struct PatchSet {
    Status status = Status::ok;
    std::vector<Patch> patches;
    std::string notes;

    bool operator==(const PatchSet&) const = default;
};

// Throws ValidationError when the status/patches invariant or the
// name-iff-attribute rule is broken.
void validate(const PatchSet& ps);

Json to_json(const Patch& p);
Json to_json(const PatchSet& ps);
PatchSet patchset_from_json(const Json& j);
// Accepts a fenced code block or a bare JSON object; throws ParseError or
// ValidationError.
PatchSet parse_patchset_response(std::string_view text);

// Applies one patch and returns the re-serialized document. Throws
// PatchError (AmbiguousTargetError for multi-match selectors), SelectorError
// or ParseError for bad fragments.
std::string apply_patch(std::string_view html, const Patch& patch);

struct AppliedPatch {
    std::size_t index = 0;  // 1-based
    std::string selector;
    Action action = Action::replace_text;
    std::string summary;
};

struct PatchSetResult {
    Status status = Status::ok;
    std::string html;
    std::vector<AppliedPatch> applied;
    std::string diff_summary;
    std::optional<std::size_t> failing_index;  // 1-based
    std::string error;
};

// Applies patches in order against the evolving document. Atomic: on any
// failure the original bytes come back with status impossible (ambiguous
// when the failure was a multi-match selector). Rejects sets whose status is
// not ok, or that are otherwise invalid, with ValidationError.
PatchSetResult apply_patchset(std::string_view html, const PatchSet& ps);

Json to_json(const PatchSetResult& r);

}  // namespace uxsim::patch
