// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "uxsim/analyze/analyze.hpp"
#include "uxsim/env/events.hpp"
#include "uxsim/llm/gateway.hpp"
#include "uxsim/patch/patch.hpp"

namespace uxsim::refine {

// ---- edit sessions ----

struct EditEntry {
    std::string instruction;
    patch::PatchSet patchset;
    std::string resulting_ref;
    std::string message;
};

// The snapshot at `cursor` is base with patchsets 1..cursor applied. Entries
// past the cursor are the redo tail and are dropped by the next edit.
struct EditSession {
    std::string session_id;
    std::string base_ref;
    std::vector<EditEntry> history;
    std::size_t cursor = 0;

    const std::string& current_ref() const;
};

Json to_json(const EditSession& s);
EditSession edit_session_from_json(const Json& j);

struct EditOutcome {
    patch::PatchSet patchset;
    patch::Status status = patch::Status::ok;  // after application
    bool applied = false;
    std::string message;
    std::string snapshot_ref;  // current snapshot after the call
    std::optional<std::size_t> failing_index;
};

Json to_json(const EditOutcome& o);

std::vector<llm::ChatMessage> edit_messages(const std::string& session_id, const std::string& html,
                                            const std::string& instruction, const std::string& target);

// Sessions live in `dir` as <session_id>.json; snapshots live in `blobs`.
// One writer per session.
class EditStore {
public:
    EditStore(env::BlobStore& blobs, std::filesystem::path dir);

    // Throws NotFoundError when the base snapshot is unknown.
    EditSession open(const std::string& base_ref);
    EditSession load(const std::string& session_id) const;
    void save(const EditSession& session) const;
    std::vector<std::string> list() const;

    std::string current_html(const EditSession& session) const;

    // Sends the edit prompt for the current snapshot. Applies an ok set and
    // records it; ambiguous, impossible or failing sets leave history as is.
    // Malformed replies get one corrective re-prompt, then EditError.
    EditOutcome edit(EditSession& session, const std::string& instruction, llm::Gateway& gateway,
                     const std::string& target = {});

    // Applies a caller-supplied patchset as if the model had returned it.
    // Throws ValidationError when status is not ok.
    EditOutcome apply(EditSession& session, const std::string& instruction, const patch::PatchSet& ps);

    // Moves the cursor back `steps` entries (clamped at the base).
    void revert(EditSession& session, std::size_t steps = 1);
    // Moves the cursor forward through the redo tail.
    void redo(EditSession& session, std::size_t steps = 1);

    // Replays patchsets 1..cursor from the base snapshot.
    std::string replay(const EditSession& session, std::size_t cursor) const;

private:
    EditOutcome record(EditSession& session, const std::string& instruction, const patch::PatchSet& ps);

    env::BlobStore& blobs_;
    std::filesystem::path dir_;
    mutable std::mutex mu_;
};

// ---- preview ----

struct DiffReport {
    std::string issue_id;
    env::AgentAction original_action;
    env::AgentAction new_action;
    std::string new_intent;
    std::string new_reasoning;
    bool action_changed = false;
    bool issue_resolved = false;
    std::string verdict;
    std::string summary;
    std::string snapshot_ref;
};

Json to_json(const DiffReport& r);

// Messages for the replayed step: the recorded prompt up to the message that
// carries the page state, with that state re-extracted from `modified_html`.
// Throws PreviewError when the recorded prompt is missing or has no state.
std::vector<llm::ChatMessage> replay_messages(const env::StepEvent& step, const std::string& modified_html);

struct Verdict {
    bool resolved = false;
    std::string verdict;
    std::string summary;
};

// {"verdict": ..., "summary": ...} or free text whose first word decides.
Verdict parse_verdict(std::string_view text);

std::vector<llm::ChatMessage> judgment_messages(const analyze::IssueEntry& issue, const env::AgentAction& before,
                                                const env::AgentAction& after, const std::string& element_before,
                                                const std::string& element_after);

// Re-decides the issue's step against the modified snapshot without touching
// any environment, then asks a separate call whether the issue is resolved.
DiffReport preview_replay(const analyze::Experiment& exp, const env::BlobStore& blobs, const std::string& issue_id,
                          const std::string& modified_ref, llm::Gateway& gateway);

// ---- impact ----

struct ImpactedRun {
    std::string persona_id;
    std::string run_id;
    int step = 0;
    std::string goal_id;

    bool operator==(const ImpactedRun&) const = default;
};

Json to_json(const std::vector<ImpactedRun>& runs);

// Goals whose trace-level tag sets have Jaccard >= threshold with `goal_id`;
// always includes `goal_id` itself.
std::vector<std::string> adjacent_goals(const analyze::Experiment& exp, const std::string& goal_id, double threshold);

// Steps whose action targeted an element the selector matches in that step's
// snapshot, on runs of the goal or an adjacent goal. Sorted by persona, run,
// step. Throws SelectorError for invalid selectors.
std::vector<ImpactedRun> impacted_personas(const analyze::Experiment& exp, const env::BlobStore& blobs,
                                           const std::string& selector, const std::string& goal_id,
                                           double threshold);

}  // namespace uxsim::refine
