// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uxsim/agent/agent.hpp"
#include "uxsim/annotate/annotate.hpp"
#include "uxsim/persona/persona.hpp"

namespace uxsim::analyze {

// In-memory view of one persisted experiment.
struct Experiment {
    std::string id;
    persona::ExperimentConfig config;
    std::vector<persona::Persona> personas;
    std::vector<agent::Trace> traces;  // sorted by run id
    std::optional<annotate::Annotations> annotations;

    const persona::Persona* find_persona(const std::string& id) const;
    const agent::Trace* find_trace(const std::string& run_id) const;
    // Throws DependencyError when the experiment is not annotated.
    const annotate::Annotations& require_annotations() const;
};

// "<experiment>.<run>.s<step>.i<k>", k 1-based within the step.
std::string issue_id(const std::string& experiment_id, const std::string& run_id, int step, std::size_t k);

struct IssueEntry {
    std::string id;
    annotate::IssueRecord record;
    std::string run_id;
    std::string persona_id;
    std::string goal_id;
    int step = 0;
    // Issues in the experiment sharing this one's type and element.
    std::size_t occurrences = 0;
};

// Every issue of every annotated run, in run then step order.
std::vector<IssueEntry> all_issues(const Experiment& exp);

struct GoalSummary {
    std::string goal_id;
    std::string goal_text;
    std::size_t agents_attempting = 0;
    std::size_t agents_with_issues = 0;
    std::size_t successes = 0;
    double success_ratio = 0.0;  // 0 when nothing was attempted
    std::vector<std::string> excluded_runs;  // unannotated
};

// One entry per configured goal, in declaration order.
std::vector<GoalSummary> goal_summary(const Experiment& exp);

enum class BreakdownMode { trait_centric, composite_persona };
BreakdownMode breakdown_mode_from_string(std::string_view s);  // QueryError
std::string_view to_string(BreakdownMode m);

struct BreakdownEntry {
    std::string key;  // "PS=budget" or the full composite key
    std::vector<persona::TraitValue> traits;
    std::size_t issue_count = 0;
    std::size_t runs = 0;
    std::size_t failures = 0;  // runs without a successful self-report
    double failure_rate = 0.0;
};

struct TraitBreakdown {
    BreakdownMode mode = BreakdownMode::trait_centric;
    std::string goal_id;
    std::size_t total_issues = 0;
    std::vector<BreakdownEntry> entries;  // issue count desc, key asc
};

TraitBreakdown trait_breakdown(const Experiment& exp, const std::string& goal_id, BreakdownMode mode);

// Filter keys: goal, trait ("DIM=value"), persona. Unknown keys throw
// QueryError. Ordered by severity desc, occurrences desc, id asc.
std::vector<IssueEntry> issue_list(const Experiment& exp, const std::map<std::string, std::string>& filter);

// Issue with its run context: persona, neighbouring steps and refs.
Json issue_detail(const Experiment& exp, const std::string& issue_id, int window = 2);
const IssueEntry& find_issue(const std::vector<IssueEntry>& issues, const std::string& issue_id);

enum class JourneyMode { page_level, goal_level };
JourneyMode journey_mode_from_string(std::string_view s);  // QueryError
std::string_view to_string(JourneyMode m);

// Query and fragment dropped, trailing slash collapsed.
std::string normalize_url(std::string_view url);

struct JourneyNode {
    std::string id;
    std::string label;
    std::string kind;  // "page" or "intent"
    std::size_t starts = 0;
    std::size_t terminations = 0;
    std::size_t visits = 0;
    std::vector<std::string> run_ids;
    std::vector<std::string> issue_ids;
};

struct JourneyLink {
    std::string source;
    std::string target;
    std::size_t flow = 0;
};

struct JourneyGraph {
    JourneyMode mode = JourneyMode::page_level;
    std::vector<JourneyNode> nodes;  // first-appearance order
    std::vector<JourneyLink> links;  // by (source, target)
    std::vector<std::string> skipped_runs;
};

// Consecutive repeats of a node collapse into one visit. goal_level needs
// tags and throws DependencyError without them.
JourneyGraph journey_graph(const Experiment& exp, JourneyMode mode);

// The node sequence a single trace contributes to the graph.
std::vector<std::string> journey_path(const Experiment& exp, const agent::Trace& trace, JourneyMode mode);

Json to_json(const GoalSummary& g);
Json to_json(const std::vector<GoalSummary>& goals);
Json to_json(const TraitBreakdown& b);
Json to_json(const IssueEntry& e);
Json to_json(const std::vector<IssueEntry>& issues);
Json to_json(const JourneyGraph& g);

// Canonical report: goals, issues, per-goal trait breakdowns and journeys.
Json report_json(const Experiment& exp);
std::string report_markdown(const Experiment& exp);

}  // namespace uxsim::analyze
