// SPDX-License-Identifier: Apache-2.0

#include <cctype>

#include "uxsim/agent/agent.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/common/text.hpp"
#include "uxsim/env/page_state.hpp"
#include "uxsim/refine/refine.hpp"

namespace uxsim::refine {

namespace {

constexpr std::string_view kJudgeSystem = R"(You review a single user interface fix.
You are given a usability issue found during a simulated browsing session, the action the simulated user took on the original page, the action taken at the same point on the modified page, and the HTML of the affected element before and after the change.
Decide whether the modification resolves the issue for this user at this step.
Answer with a JSON object in a fenced code block: {"verdict": "resolved" | "unresolved", "summary": "<one or two sentences>"}.)";

std::string marker(const std::string& issue_id) { return "[judge " + issue_id + "]"; }

std::string element_html(const std::string& html, const std::string& selector) {
    if (selector.empty()) return "(no element targeted)";
    auto r = patch::resolve_target(html, patch::Target::selector(selector));
    if (auto* found = std::get_if<patch::Resolved>(&r)) return found->outer_html;
    return "(not present)";
}

std::string target_selector(const env::StepEvent& step) {
    if (!step.action.target_index) return {};
    const auto* el = step.page_state.element(*step.action.target_index);
    return el ? el->selector : std::string();
}

}  // namespace

Json to_json(const DiffReport& r) {
    Json j;
    j["version"] = "1.0";
    j["issue_id"] = r.issue_id;
    j["snapshot_ref"] = r.snapshot_ref;
    j["original_action"] = env::to_json(r.original_action);
    j["new_action"] = env::to_json(r.new_action);
    j["new_intent"] = r.new_intent;
    j["new_reasoning"] = r.new_reasoning;
    j["action_changed"] = r.action_changed;
    j["issue_resolved"] = r.issue_resolved;
    j["verdict"] = r.verdict;
    j["summary"] = r.summary;
    return j;
}

std::vector<llm::ChatMessage> replay_messages(const env::StepEvent& step, const std::string& modified_html) {
    if (step.prompt_text.empty()) {
        throw PreviewError("step " + std::to_string(step.step) + " of " + step.run_id + " has no recorded prompt");
    }
    std::vector<llm::ChatMessage> recorded;
    try {
        recorded = llm::parse_prompt(step.prompt_text);
    } catch (const ParseError& e) {
        throw PreviewError(std::string("recorded prompt is unreadable: ") + e.what());
    }
    auto state = env::extract_page_state(modified_html, step.page_state.url, step.page_state.scroll_offset);
    state.tabs = step.page_state.tabs;
    std::vector<llm::ChatMessage> out;
    for (auto& m : recorded) {
        bool carries_state = m.content.find(env::kStateBegin) != std::string::npos;
        if (carries_state) m.content = env::replace_state_block(m.content, state);
        out.push_back(std::move(m));
        if (carries_state) return out;
    }
    throw PreviewError("recorded prompt has no page-state block");
}

Verdict parse_verdict(std::string_view text_in) {
    Verdict v;
    auto body = text::strip_code_fence(text_in);
    try {
        auto j = parse_json(body, "verdict");
        if (j.is_object() && j.contains("verdict") && j.at("verdict").is_string()) {
            v.verdict = text::to_lower(text::trim(j.at("verdict").get<std::string>()));
            v.summary = j.value("summary", std::string());
            v.resolved = v.verdict == "resolved";
            return v;
        }
    } catch (const ParseError&) {
    }
    auto trimmed = text::trim(text_in);
    std::string word;
    for (char c : trimmed) {
        if (!std::isalpha(static_cast<unsigned char>(c))) break;
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    v.verdict = word;
    v.resolved = word == "resolved";
    v.summary = trimmed;
    return v;
}

std::vector<llm::ChatMessage> judgment_messages(const analyze::IssueEntry& issue, const env::AgentAction& before,
                                                const env::AgentAction& after, const std::string& element_before,
                                                const std::string& element_after) {
    Json input;
    input["issue"] = annotate::to_json(issue.record);
    input["original_action"] = env::to_json(before);
    input["original_action_description"] = env::describe(before);
    input["new_action"] = env::to_json(after);
    input["new_action_description"] = env::describe(after);
    input["element_before"] = element_before;
    input["element_after"] = element_after;
    return {{llm::Role::system, std::string(kJudgeSystem)},
            {llm::Role::user, marker(issue.id) + "\n" + dump_json(input, 2)}};
}

DiffReport preview_replay(const analyze::Experiment& exp, const env::BlobStore& blobs, const std::string& issue_id,
                          const std::string& modified_ref, llm::Gateway& gateway) {
    exp.require_annotations();
    auto issues = analyze::all_issues(exp);
    const auto& issue = analyze::find_issue(issues, issue_id);
    const auto* trace = exp.find_trace(issue.run_id);
    if (!trace) throw NotFoundError("run '" + issue.run_id + "' is missing");
    const env::StepEvent* step = nullptr;
    for (const auto& s : trace->steps) {
        if (s.step == issue.step) step = &s;
    }
    if (!step) throw PreviewError("run " + issue.run_id + " has no step " + std::to_string(issue.step));

    auto modified_html = blobs.get(modified_ref);
    auto messages = replay_messages(*step, modified_html);
    auto reply = gateway.complete(gateway.make_request(llm::Purpose::refinement, messages, issue_id));
    agent::Decision decision;
    try {
        decision = agent::parse_decision(reply.text);
    } catch (const ParseError& first) {
        messages.push_back({llm::Role::assistant, reply.text});
        messages.push_back({llm::Role::user, agent::format_reminder(issue.run_id, issue.step, first.what())});
        auto retry = gateway.complete(gateway.make_request(llm::Purpose::refinement, messages, issue_id));
        try {
            decision = agent::parse_decision(retry.text);
        } catch (const ParseError& second) {
            throw PreviewError("replayed decision is unreadable: " + std::string(second.what()));
        }
    }

    DiffReport report;
    report.issue_id = issue_id;
    report.snapshot_ref = modified_ref;
    report.original_action = step->action;
    report.new_action = decision.action;
    report.new_intent = decision.intent;
    report.new_reasoning = decision.reasoning;
    report.action_changed = !(report.original_action == report.new_action);

    // The judgment sees structured actions and element HTML only, never the
    // replay completion.
    auto selector = target_selector(*step);
    auto before_html = element_html(blobs.get(step->raw_html_ref), selector);
    auto after_html = element_html(modified_html, selector);
    auto judge = judgment_messages(issue, report.original_action, report.new_action, before_html, after_html);
    auto verdict = parse_verdict(
        gateway.complete(gateway.make_request(llm::Purpose::refinement, std::move(judge), issue_id + "#judge")).text);
    report.issue_resolved = verdict.resolved;
    report.verdict = verdict.verdict;
    report.summary = verdict.summary;
    return report;
}

}  // namespace uxsim::refine
