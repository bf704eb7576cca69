// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "uxsim/agent/agent.hpp"
#include "uxsim/common/json.hpp"
#include "uxsim/llm/gateway.hpp"

namespace uxsim::annotate {

// ---- cognitive-intent tagging ----

// One inner list per trace step, tags as the model wrote them.
using TraceTags = std::vector<std::vector<std::string>>;

struct StepTags {
    std::string run_id;
    int step = 0;
    std::vector<std::string> tags;
};

std::vector<StepTags> to_step_tags(const std::string& run_id, const TraceTags& tags);

std::string render_tagging_prompt(int n_tags, std::size_t n_steps);
std::vector<llm::ChatMessage> tagging_messages(const agent::Trace& trace, int n_tags, const std::string& feedback);

// Validates the array-of-arrays shape: exactly `expected_steps` inner
// arrays of at most `n_tags` non-empty strings. Throws ValidationError.
TraceTags parse_tags(std::string_view text, std::size_t expected_steps, int n_tags);

// One corrective re-prompt quoting the violation; a second failure throws
// AnnotationError.
TraceTags tag_trace(const agent::Trace& trace, int n_tags, llm::Gateway& gateway, const std::string& feedback = {});

// Case-folded, trimmed, internal whitespace collapsed.
std::string normalize_tag(std::string_view tag);
std::set<std::string> tag_set(const TraceTags& tags);
// |a ∩ b| / |a ∪ b|; two empty sets are identical (1).
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct TaggedTrace {
    std::string run_id;
    std::string persona_id;
    TraceTags tags;
};

struct TagScore {
    double intra = 0.0;
    double inter = 0.0;
    double score = 0.0;
};

// Mean pairwise Jaccard of trace-level tag sets over same-persona pairs
// (intra) and cross-persona pairs (inter); a missing pair class counts 0.
TagScore score_tags(const std::vector<TaggedTrace>& traces);

std::string feedback_text(double score);

struct RefineResult {
    std::map<std::string, TraceTags> tags;            // best round, by run id
    std::vector<TagScore> history;                    // one per executed round
    std::size_t best_round = 0;                       // 1-based
    std::map<std::string, std::string> failures;      // best round, by run id
};

// Tags every trace, scores, and repeats with scalar feedback until the score
// reaches `threshold` or `rounds` are spent. Returns the best round.
RefineResult refine_tagging(const std::vector<agent::Trace>& traces, llm::Gateway& gateway, int n_tags, int rounds,
                            double threshold, int pool = 1);

// ---- usability issue detection ----

inline constexpr std::array<std::string_view, 19> kUptCodes = {
    "A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4", "C1", "C2",
    "C3", "C4", "D1", "D2", "D3", "E1", "E2", "E3", "E4"};

bool is_upt_code(std::string_view code);

struct IssueRecord {
    std::string type;
    std::string element;
    std::string reason;
    std::string fix;
    std::vector<std::string> upt_codes;
    std::string upt_explanation;
    int issue_severity = 0;
    // Provenance; not part of the report JSON.
    std::string run_id;
    int step = 0;

    bool operator==(const IssueRecord&) const = default;
};

struct StepIssues {
    int step = 0;
    std::vector<IssueRecord> issues;

    bool operator==(const StepIssues&) const = default;
};

struct IssueReport {
    std::string version = "1.0";
    int expected_steps = 0;
    std::vector<StepIssues> steps;

    bool operator==(const IssueReport&) const = default;
};

// Throws ValidationError on any schema violation.
void validate(const IssueReport& report);

Json to_json(const IssueRecord& r);
Json to_json(const IssueReport& report);
// Strict schema parse; fills provenance from `run_id` and step numbers.
IssueReport issue_report_from_json(const Json& j, const std::string& run_id = {});
// Parses model output (fenced or bare) and checks expected_steps.
IssueReport parse_issue_report(std::string_view text, int expected_steps, const std::string& run_id = {});

std::string render_issue_prompt(int expected_len);
std::vector<llm::ChatMessage> issue_messages(const agent::Trace& trace);

// One corrective re-prompt; a second failure throws AnnotationError.
IssueReport detect_issues(const agent::Trace& trace, llm::Gateway& gateway);

// ---- experiment-level annotation files ----

struct AnnotationOptions {
    int n_tags = 3;
    int rounds = 1;
    double threshold = 0.0;
    int pool = 1;
};

struct Annotations {
    std::map<std::string, TraceTags> tags;
    std::vector<TagScore> score_history;
    std::size_t best_round = 0;
    std::map<std::string, IssueReport> issues;
    std::map<std::string, std::vector<std::string>> flags;  // run id -> problems
};

// Annotates complete traces and writes annotations/{tags,issues,flags}.json.
Annotations annotate_experiment(const std::filesystem::path& experiment_dir, const std::vector<agent::Trace>& traces,
                                llm::Gateway& gateway, const AnnotationOptions& options);

Json tags_json(const Annotations& a, int n_tags);
Json issues_json(const Annotations& a);
Json flags_json(const Annotations& a);

// Reads whatever annotation files exist; throws DependencyError when none do.
Annotations load_annotations(const std::filesystem::path& experiment_dir);
bool has_annotations(const std::filesystem::path& experiment_dir);

}  // namespace uxsim::annotate
