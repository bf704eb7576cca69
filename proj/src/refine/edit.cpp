// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>

#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/prompts/templates.hpp"
#include "uxsim/refine/refine.hpp"

namespace uxsim::refine {

namespace {

std::string marker(const std::string& session_id) { return "[edit " + session_id + "]"; }

patch::PatchSet parse_reply(std::string_view text) {
    try {
        return patch::parse_patchset_response(text);
    } catch (const ParseError& e) {
        throw ValidationError(e.what());
    }
}

bool valid_session_id(const std::string& id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    });
}

}  // namespace

const std::string& EditSession::current_ref() const {
    return cursor == 0 ? base_ref : history[cursor - 1].resulting_ref;
}

Json to_json(const EditSession& s) {
    Json history = Json::array();
    for (const auto& e : s.history) {
        history.push_back({{"instruction", e.instruction},
                           {"patchset", patch::to_json(e.patchset)},
                           {"resulting_ref", e.resulting_ref},
                           {"message", e.message}});
    }
    Json j;
    j["version"] = "1.0";
    j["session_id"] = s.session_id;
    j["base_ref"] = s.base_ref;
    j["cursor"] = s.cursor;
    j["current_ref"] = s.current_ref();
    j["history"] = history;
    return j;
}

EditSession edit_session_from_json(const Json& j) {
    EditSession s;
    s.session_id = require_string(j, "session_id", "edit session");
    s.base_ref = require_string(j, "base_ref", "edit session");
    for (const auto& e : require_field(j, "history", "edit session")) {
        s.history.push_back({require_string(e, "instruction", "edit entry"),
                             patch::patchset_from_json(require_field(e, "patchset", "edit entry")),
                             require_string(e, "resulting_ref", "edit entry"), e.value("message", std::string())});
    }
    s.cursor = require_field(j, "cursor", "edit session").get<std::size_t>();
    if (s.cursor > s.history.size()) throw ValidationError("edit session cursor is past its history");
    return s;
}

Json to_json(const EditOutcome& o) {
    Json j;
    j["status"] = patch::to_string(o.status);
    j["applied"] = o.applied;
    j["message"] = o.message;
    j["snapshot_ref"] = o.snapshot_ref;
    j["failing_index"] = o.failing_index ? Json(*o.failing_index) : Json(nullptr);
    j["patchset"] = patch::to_json(o.patchset);
    return j;
}

std::vector<llm::ChatMessage> edit_messages(const std::string& session_id, const std::string& html,
                                            const std::string& instruction, const std::string& target) {
    std::string user = marker(session_id) + "\n";
    user += "request: " + instruction + "\n";
    user += "target: " + (target.empty() ? std::string("(none given; locate the element from the request)") : target) +
            "\n";
    user += "policy: edits must stay inside this snapshot; no external resources.\n";
    user += "html:\n```html\n" + html + "\n```";
    return {{llm::Role::system, std::string(prompts::kHtmlEditPrompt)}, {llm::Role::user, user}};
}

EditStore::EditStore(env::BlobStore& blobs, std::filesystem::path dir) : blobs_(blobs), dir_(std::move(dir)) {}

EditSession EditStore::open(const std::string& base_ref) {
    if (!blobs_.contains(base_ref)) throw NotFoundError("unknown snapshot '" + base_ref + "'");
    std::lock_guard lock(mu_);
    EditSession s;
    s.base_ref = base_ref;
    for (int n = 1;; ++n) {
        s.session_id = base_ref.substr(0, 12) + "-" + std::to_string(n);
        if (!std::filesystem::exists(dir_ / (s.session_id + ".json"))) break;
    }
    fs::write_file_atomic(dir_ / (s.session_id + ".json"), dump_json(to_json(s)) + "\n");
    return s;
}

EditSession EditStore::load(const std::string& session_id) const {
    if (!valid_session_id(session_id)) throw NotFoundError("unknown edit session '" + session_id + "'");
    auto path = dir_ / (session_id + ".json");
    if (!std::filesystem::exists(path)) throw NotFoundError("unknown edit session '" + session_id + "'");
    return edit_session_from_json(parse_json(fs::read_file(path), path.string()));
}

void EditStore::save(const EditSession& session) const {
    fs::write_file_atomic(dir_ / (session.session_id + ".json"), dump_json(to_json(session)) + "\n");
}

std::vector<std::string> EditStore::list() const {
    std::vector<std::string> out;
    if (!std::filesystem::exists(dir_)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string EditStore::current_html(const EditSession& session) const { return blobs_.get(session.current_ref()); }

EditOutcome EditStore::record(EditSession& session, const std::string& instruction, const patch::PatchSet& ps) {
    EditOutcome out;
    out.patchset = ps;
    out.status = ps.status;
    if (ps.status != patch::Status::ok) {
        out.message = ps.notes.empty() ? "edit not applied: " + std::string(patch::to_string(ps.status)) : ps.notes;
        out.snapshot_ref = session.current_ref();
        return out;
    }
    auto result = patch::apply_patchset(current_html(session), ps);
    out.status = result.status;
    out.failing_index = result.failing_index;
    if (result.status != patch::Status::ok) {
        out.message = "patch " + std::to_string(result.failing_index.value_or(0)) + " failed: " + result.error;
        out.snapshot_ref = session.current_ref();
        return out;
    }
    auto ref = blobs_.put(result.html);
    out.applied = true;
    out.message = result.diff_summary;
    out.snapshot_ref = ref;
    session.history.resize(session.cursor);
    session.history.push_back({instruction, ps, ref, out.message});
    session.cursor = session.history.size();
    save(session);
    return out;
}

EditOutcome EditStore::edit(EditSession& session, const std::string& instruction, llm::Gateway& gateway,
                            const std::string& target) {
    auto messages = edit_messages(session.session_id, current_html(session), instruction, target);
    auto reply = gateway.complete(gateway.make_request(llm::Purpose::refinement, messages, session.session_id));
    patch::PatchSet ps;
    try {
        ps = parse_reply(reply.text);
    } catch (const ValidationError& first) {
        messages.push_back({llm::Role::assistant, reply.text});
        messages.push_back({llm::Role::user, marker(session.session_id) + " Your output was rejected: " +
                                                 first.what() +
                                                 ". Return a single JSON object in a fenced code block with keys "
                                                 "status, patches and notes."});
        auto retry = gateway.complete(gateway.make_request(llm::Purpose::refinement, messages, session.session_id));
        try {
            ps = parse_reply(retry.text);
        } catch (const ValidationError& second) {
            throw EditError("edit " + session.session_id + ": " + second.what());
        }
    }
    return record(session, instruction, ps);
}

EditOutcome EditStore::apply(EditSession& session, const std::string& instruction, const patch::PatchSet& ps) {
    patch::validate(ps);
    if (ps.status != patch::Status::ok) {
        throw ValidationError("patchset status is '" + std::string(patch::to_string(ps.status)) + "', not 'ok'");
    }
    return record(session, instruction, ps);
}

void EditStore::revert(EditSession& session, std::size_t steps) {
    session.cursor -= std::min(steps, session.cursor);
    save(session);
}

void EditStore::redo(EditSession& session, std::size_t steps) {
    session.cursor = std::min(session.cursor + steps, session.history.size());
    save(session);
}

std::string EditStore::replay(const EditSession& session, std::size_t cursor) const {
    if (cursor > session.history.size()) throw ValidationError("cursor is past the session history");
    auto html = blobs_.get(session.base_ref);
    for (std::size_t i = 0; i < cursor; ++i) {
        auto result = patch::apply_patchset(html, session.history[i].patchset);
        if (result.status != patch::Status::ok) {
            throw IntegrityError("edit " + std::to_string(i + 1) + " no longer applies: " + result.error);
        }
        html = std::move(result.html);
    }
    return html;
}

}  // namespace uxsim::refine
