// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "uxsim/annotate/annotate.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/common/text.hpp"
#include "uxsim/prompts/templates.hpp"

namespace uxsim::annotate {

namespace {

constexpr std::array<std::string_view, 7> kIssueFields = {"type",      "element",         "reason",        "fix",
                                                          "upt_codes", "upt_explanation", "issue_severity"};

std::string marker(const agent::Trace& trace) { return "[issues " + trace.run_id + "]"; }

std::string field_string(const Json& j, std::string_view key, const std::string& where) {
    const auto& v = j.at(std::string(key));
    if (!v.is_string()) throw ValidationError(where + ": '" + std::string(key) + "' must be a string");
    return v.get<std::string>();
}

IssueRecord issue_from_json(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": issue must be an object");
    for (auto key : kIssueFields) {
        if (!j.contains(std::string(key))) throw ValidationError(where + ": missing '" + std::string(key) + "'");
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find(kIssueFields.begin(), kIssueFields.end(), key) == kIssueFields.end()) {
            throw ValidationError(where + ": unexpected field '" + key + "'");
        }
    }
    IssueRecord r;
    r.type = field_string(j, "type", where);
    r.element = field_string(j, "element", where);
    r.reason = field_string(j, "reason", where);
    r.fix = field_string(j, "fix", where);
    r.upt_explanation = field_string(j, "upt_explanation", where);
    const auto& codes = j.at("upt_codes");
    if (!codes.is_array()) throw ValidationError(where + ": 'upt_codes' must be an array");
    for (const auto& c : codes) {
        if (!c.is_string()) throw ValidationError(where + ": upt codes must be strings");
        r.upt_codes.push_back(c.get<std::string>());
    }
    const auto& sev = j.at("issue_severity");
    if (!sev.is_number_integer()) throw ValidationError(where + ": 'issue_severity' must be an integer 0-4");
    auto value = sev.get<long long>();
    if (value < 0 || value > 4) {
        throw ValidationError(where + ": issue_severity " + std::to_string(value) + " is outside 0-4");
    }
    r.issue_severity = static_cast<int>(value);
    return r;
}

}  // namespace

bool is_upt_code(std::string_view code) {
    return std::find(kUptCodes.begin(), kUptCodes.end(), code) != kUptCodes.end();
}

void validate(const IssueReport& report) {
    if (report.version != "1.0") throw ValidationError("report version must be \"1.0\"");
    if (report.expected_steps < 0) throw ValidationError("expected_steps must be non-negative");
    if (report.steps.size() != static_cast<std::size_t>(report.expected_steps)) {
        throw ValidationError("report has " + std::to_string(report.steps.size()) + " steps, expected " +
                              std::to_string(report.expected_steps));
    }
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
        const auto& s = report.steps[i];
        if (s.step != static_cast<int>(i + 1)) {
            throw ValidationError("step " + std::to_string(i + 1) + " is numbered " + std::to_string(s.step));
        }
        for (const auto& issue : s.issues) {
            auto where = "step " + std::to_string(s.step);
            // The type labels the issue and keys occurrence counts.
            if (text::trim(issue.type).empty()) throw ValidationError(where + ": issue type must not be empty");
            if (issue.issue_severity < 0 || issue.issue_severity > 4) {
                throw ValidationError(where + ": issue_severity " + std::to_string(issue.issue_severity) +
                                      " is outside 0-4");
            }
            if (issue.upt_codes.empty()) throw ValidationError(where + ": upt_codes must not be empty");
            for (const auto& c : issue.upt_codes) {
                if (!is_upt_code(c)) throw ValidationError(where + ": unknown UPT code '" + c + "'");
            }
        }
    }
}

Json to_json(const IssueRecord& r) {
    Json j;
    j["type"] = r.type;
    j["element"] = r.element;
    j["reason"] = r.reason;
    j["fix"] = r.fix;
    j["upt_codes"] = r.upt_codes;
    j["upt_explanation"] = r.upt_explanation;
    j["issue_severity"] = r.issue_severity;
    return j;
}

Json to_json(const IssueReport& report) {
    Json steps = Json::array();
    for (const auto& s : report.steps) {
        Json issues = Json::array();
        for (const auto& i : s.issues) issues.push_back(to_json(i));
        steps.push_back({{"step", s.step}, {"issues", issues}});
    }
    Json j;
    j["version"] = report.version;
    j["expected_steps"] = report.expected_steps;
    j["steps"] = steps;
    return j;
}

IssueReport issue_report_from_json(const Json& j, const std::string& run_id) {
    if (!j.is_object()) throw ValidationError("issue report must be a JSON object");
    IssueReport report;
    const auto& version = require_field(j, "version", "issue report");
    if (!version.is_string()) throw ValidationError("report version must be \"1.0\"");
    report.version = version.get<std::string>();
    const auto& expected = require_field(j, "expected_steps", "issue report");
    if (!expected.is_number_integer()) throw ValidationError("expected_steps must be an integer");
    report.expected_steps = expected.get<int>();
    const auto& steps = require_field(j, "steps", "issue report");
    if (!steps.is_array()) throw ValidationError("'steps' must be an array");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& sj = steps[i];
        auto where = "steps[" + std::to_string(i) + "]";
        if (!sj.is_object() || !sj.contains("step") || !sj.at("step").is_number_integer()) {
            throw ValidationError(where + ": needs an integer 'step'");
        }
        if (!sj.contains("issues") || !sj.at("issues").is_array()) {
            throw ValidationError(where + ": needs an 'issues' array");
        }
        StepIssues s;
        s.step = sj.at("step").get<int>();
        for (const auto& ij : sj.at("issues")) {
            auto issue = issue_from_json(ij, "step " + std::to_string(s.step));
            issue.run_id = run_id;
            issue.step = s.step;
            s.issues.push_back(std::move(issue));
        }
        report.steps.push_back(std::move(s));
    }
    validate(report);
    return report;
}

IssueReport parse_issue_report(std::string_view text_in, int expected_steps, const std::string& run_id) {
    auto body = text::strip_code_fence(text_in);
    Json j;
    try {
        j = parse_json(body, "issue detection output");
    } catch (const ParseError& e) {
        throw ValidationError(std::string("output is not valid JSON: ") + e.what());
    }
    auto report = issue_report_from_json(j, run_id);
    if (report.expected_steps != expected_steps) {
        throw ValidationError("expected_steps is " + std::to_string(report.expected_steps) + ", trace has " +
                              std::to_string(expected_steps) + " steps");
    }
    return report;
}

std::string render_issue_prompt(int expected_len) {
    return text::substitute(prompts::kIssueDetectionPrompt, {{"expected_len", std::to_string(expected_len)}});
}

std::vector<llm::ChatMessage> issue_messages(const agent::Trace& trace) {
    std::string logs;
    for (const auto& s : trace.steps) {
        Json j;
        j["step"] = s.step;
        j["url"] = s.url;
        j["intent"] = s.intent;
        j["reasoning"] = s.reasoning;
        j["action"] = env::describe(s.action);
        if (auto* el = s.action.target_index ? s.page_state.element(*s.action.target_index) : nullptr) {
            j["target"] = {{"selector", el->selector}, {"tag", el->tag}, {"text", el->text}};
        }
        j["result"] = s.result;
        if (s.error) j["error"] = *s.error;
        logs += dump_json(j, -1) + "\n";
    }
    auto user = marker(trace) + "\nSteps: " + std::to_string(trace.steps.size()) + "\n" + logs;
    return {{llm::Role::system, render_issue_prompt(static_cast<int>(trace.steps.size()))}, {llm::Role::user, user}};
}

IssueReport detect_issues(const agent::Trace& trace, llm::Gateway& gateway) {
    auto expected = static_cast<int>(trace.steps.size());
    auto messages = issue_messages(trace);
    auto reply = gateway.complete(gateway.make_request(llm::Purpose::annotation, messages, trace.run_id));
    try {
        return parse_issue_report(reply.text, expected, trace.run_id);
    } catch (const ValidationError& first) {
        messages.push_back({llm::Role::assistant, reply.text});
        messages.push_back({llm::Role::user, marker(trace) + " Your output was rejected: " + first.what() +
                                                 ". Return only the JSON object with exactly " +
                                                 std::to_string(expected) + " steps."});
        auto retry = gateway.complete(gateway.make_request(llm::Purpose::annotation, messages, trace.run_id));
        try {
            return parse_issue_report(retry.text, expected, trace.run_id);
        } catch (const ValidationError& second) {
            throw AnnotationError("issue detection " + trace.run_id + ": " + second.what());
        }
    }
}

}  // namespace uxsim::annotate
