// SPDX-License-Identifier: Apache-2.0

#include "uxsim/analyze/analyze.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "uxsim/common/error.hpp"
#include "uxsim/common/text.hpp"

namespace uxsim::analyze {

namespace {

constexpr std::string_view kUntagged = "(untagged)";

std::string occurrence_key(const annotate::IssueRecord& r) {
    return annotate::normalize_tag(r.type) + "\x1f" + annotate::normalize_tag(r.element);
}

bool has_issue(const annotate::IssueReport& report) {
    return std::any_of(report.steps.begin(), report.steps.end(), [](const auto& s) { return !s.issues.empty(); });
}

std::size_t issue_count(const annotate::IssueReport& report) {
    std::size_t n = 0;
    for (const auto& s : report.steps) n += s.issues.size();
    return n;
}

const persona::Goal& require_goal(const Experiment& exp, const std::string& goal_id) {
    for (const auto& g : exp.config.goals) {
        if (g.id == goal_id) return g;
    }
    throw NotFoundError("unknown goal '" + goal_id + "'");
}

std::string format_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// "PS=budget" or "PS:budget".
persona::TraitValue parse_trait_filter(const Experiment& exp, const std::string& raw) {
    auto pos = raw.find_first_of("=:");
    if (pos == std::string::npos || pos == 0 || pos + 1 == raw.size()) {
        throw QueryError("trait filter must look like DIMENSION=value, got '" + raw + "'");
    }
    persona::TraitValue tv{raw.substr(0, pos), {}, raw.substr(pos + 1)};
    for (const auto& d : exp.config.dimensions) {
        if (d.name != tv.dimension) continue;
        if (std::find(d.values.begin(), d.values.end(), tv.value) == d.values.end()) {
            throw QueryError("dimension '" + d.name + "' has no value '" + tv.value + "'");
        }
        tv.label = d.display_label();
        return tv;
    }
    throw QueryError("unknown trait dimension '" + tv.dimension + "'");
}

}  // namespace

const persona::Persona* Experiment::find_persona(const std::string& pid) const {
    for (const auto& p : personas) {
        if (p.id == pid) return &p;
    }
    return nullptr;
}

const agent::Trace* Experiment::find_trace(const std::string& run_id) const {
    for (const auto& t : traces) {
        if (t.run_id == run_id) return &t;
    }
    return nullptr;
}

const annotate::Annotations& Experiment::require_annotations() const {
    if (!annotations) throw DependencyError("experiment '" + id + "' has no annotations; run annotate first");
    return *annotations;
}

std::string issue_id(const std::string& experiment_id, const std::string& run_id, int step, std::size_t k) {
    return experiment_id + "." + run_id + ".s" + std::to_string(step) + ".i" + std::to_string(k);
}

std::vector<IssueEntry> all_issues(const Experiment& exp) {
    std::vector<IssueEntry> out;
    if (!exp.annotations) return out;
    for (const auto& trace : exp.traces) {
        auto it = exp.annotations->issues.find(trace.run_id);
        if (it == exp.annotations->issues.end()) continue;
        for (const auto& s : it->second.steps) {
            for (std::size_t k = 0; k < s.issues.size(); ++k) {
                IssueEntry e;
                e.id = issue_id(exp.id, trace.run_id, s.step, k + 1);
                e.record = s.issues[k];
                e.record.run_id = trace.run_id;
                e.record.step = s.step;
                e.run_id = trace.run_id;
                e.persona_id = trace.persona_id;
                e.goal_id = trace.goal_id;
                e.step = s.step;
                out.push_back(std::move(e));
            }
        }
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& e : out) ++counts[occurrence_key(e.record)];
    for (auto& e : out) e.occurrences = counts[occurrence_key(e.record)];
    return out;
}

std::vector<GoalSummary> goal_summary(const Experiment& exp) {
    const auto& ann = exp.require_annotations();
    std::vector<GoalSummary> out;
    for (const auto& g : exp.config.goals) {
        GoalSummary s;
        s.goal_id = g.id;
        s.goal_text = g.text;
        for (const auto& t : exp.traces) {
            if (t.goal_id != g.id) continue;
            auto it = ann.issues.find(t.run_id);
            if (it == ann.issues.end()) {
                s.excluded_runs.push_back(t.run_id);
                continue;
            }
            ++s.agents_attempting;
            if (has_issue(it->second)) ++s.agents_with_issues;
            if (t.terminal.success == true) ++s.successes;
        }
        s.success_ratio =
            s.agents_attempting ? static_cast<double>(s.successes) / static_cast<double>(s.agents_attempting) : 0.0;
        out.push_back(std::move(s));
    }
    return out;
}

BreakdownMode breakdown_mode_from_string(std::string_view s) {
    if (s == "trait_centric") return BreakdownMode::trait_centric;
    if (s == "composite_persona") return BreakdownMode::composite_persona;
    throw QueryError("unknown breakdown mode '" + std::string(s) + "'");
}

std::string_view to_string(BreakdownMode m) {
    return m == BreakdownMode::trait_centric ? "trait_centric" : "composite_persona";
}

TraitBreakdown trait_breakdown(const Experiment& exp, const std::string& goal_id, BreakdownMode mode) {
    require_goal(exp, goal_id);
    const auto& ann = exp.require_annotations();

    TraitBreakdown out;
    out.mode = mode;
    out.goal_id = goal_id;
    std::map<std::string, BreakdownEntry> entries;

    if (mode == BreakdownMode::trait_centric) {
        for (const auto& d : exp.config.dimensions) {
            for (const auto& v : d.values) {
                auto& e = entries[d.name + "=" + v];
                e.key = d.name + "=" + v;
                e.traits = {{d.name, d.display_label(), v}};
            }
        }
    }

    for (const auto& t : exp.traces) {
        if (t.goal_id != goal_id) continue;
        auto it = ann.issues.find(t.run_id);
        if (it == ann.issues.end()) continue;
        const auto* p = exp.find_persona(t.persona_id);
        if (!p) continue;
        auto n = issue_count(it->second);
        out.total_issues += n;
        bool failed = t.terminal.success != true;

        std::vector<std::pair<std::string, std::vector<persona::TraitValue>>> keys;
        if (mode == BreakdownMode::trait_centric) {
            for (const auto& tv : p->traits) keys.push_back({tv.dimension + "=" + tv.value, {tv}});
        } else {
            keys.push_back({p->composite_key(), p->traits});
        }
        for (auto& [key, traits] : keys) {
            auto& e = entries[key];
            if (e.key.empty()) {
                e.key = key;
                e.traits = traits;
            }
            e.issue_count += n;
            ++e.runs;
            if (failed) ++e.failures;
        }
    }

    for (auto& [_, e] : entries) {
        e.failure_rate = e.runs ? static_cast<double>(e.failures) / static_cast<double>(e.runs) : 0.0;
        out.entries.push_back(std::move(e));
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const BreakdownEntry& a, const BreakdownEntry& b) {
        if (a.issue_count != b.issue_count) return a.issue_count > b.issue_count;
        return a.key < b.key;
    });
    return out;
}

std::vector<IssueEntry> issue_list(const Experiment& exp, const std::map<std::string, std::string>& filter) {
    std::optional<std::string> goal, persona_id;
    std::optional<persona::TraitValue> trait;
    for (const auto& [key, value] : filter) {
        if (key == "goal") goal = value;
        else if (key == "persona") persona_id = value;
        else if (key == "trait") trait = parse_trait_filter(exp, value);
        else throw QueryError("unknown filter key '" + key + "'");
    }
    exp.require_annotations();

    std::vector<IssueEntry> out;
    for (auto& e : all_issues(exp)) {
        if (goal && e.goal_id != *goal) continue;
        if (persona_id && e.persona_id != *persona_id) continue;
        if (trait) {
            const auto* p = exp.find_persona(e.persona_id);
            if (!p || p->trait(trait->dimension) != trait->value) continue;
        }
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const IssueEntry& a, const IssueEntry& b) {
        if (a.record.issue_severity != b.record.issue_severity) {
            return a.record.issue_severity > b.record.issue_severity;
        }
        if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
        return a.id < b.id;
    });
    return out;
}

const IssueEntry& find_issue(const std::vector<IssueEntry>& issues, const std::string& id) {
    for (const auto& e : issues) {
        if (e.id == id) return e;
    }
    throw NotFoundError("unknown issue '" + id + "'");
}

Json issue_detail(const Experiment& exp, const std::string& id, int window) {
    exp.require_annotations();
    auto issues = all_issues(exp);
    const auto& entry = find_issue(issues, id);
    const auto* trace = exp.find_trace(entry.run_id);
    if (!trace) throw NotFoundError("run '" + entry.run_id + "' is missing");

    Json detail;
    detail["issue"] = to_json(entry);
    if (const auto* p = exp.find_persona(entry.persona_id)) detail["persona"] = persona::to_json(*p);
    for (const auto& g : exp.config.goals) {
        if (g.id == entry.goal_id) detail["goal"] = {{"id", g.id}, {"text", g.text}};
    }
    detail["terminal"] = agent::summary_json(*trace).at("terminal");

    Json reasoning = Json::array();
    Json timeline = Json::array();
    for (const auto& s : trace->steps) {
        if (s.step == entry.step) {
            Json step;
            step["step"] = s.step;
            step["url"] = s.url;
            step["raw_html_ref"] = s.raw_html_ref;
            step["screenshot_ref"] = s.screenshot_ref ? Json(*s.screenshot_ref) : Json(nullptr);
            step["intent"] = s.intent;
            step["reasoning"] = s.reasoning;
            step["action"] = env::to_json(s.action);
            step["result"] = s.result;
            detail["step"] = step;
        }
        if (std::abs(s.step - entry.step) <= window) {
            reasoning.push_back({{"step", s.step}, {"intent", s.intent}, {"reasoning", s.reasoning}});
        }
        Json t;
        t["step"] = s.step;
        t["url"] = s.url;
        t["action"] = env::describe(s.action);
        t["result"] = s.result;
        if (s.error) t["error"] = *s.error;
        t["current"] = s.step == entry.step;
        timeline.push_back(std::move(t));
    }
    detail["reasoning_window"] = reasoning;
    detail["timeline"] = timeline;
    return detail;
}

JourneyMode journey_mode_from_string(std::string_view s) {
    if (s == "page_level") return JourneyMode::page_level;
    if (s == "goal_level") return JourneyMode::goal_level;
    throw QueryError("unknown journey mode '" + std::string(s) + "'");
}

std::string_view to_string(JourneyMode m) { return m == JourneyMode::page_level ? "page_level" : "goal_level"; }

std::string normalize_url(std::string_view url) {
    auto cut = url.find_first_of("?#");
    std::string out(url.substr(0, cut));
    auto path_start = out.find("://");
    path_start = path_start == std::string::npos ? 0 : out.find('/', path_start + 3);
    if (path_start == std::string::npos) return out + "/";
    while (out.size() > path_start + 1 && out.back() == '/') out.pop_back();
    if (out.empty()) out = "/";
    return out;
}

namespace {

// Page url, or the step's first intent tag when `tags` is given.
std::string step_node(const env::StepEvent& s, const annotate::TraceTags* tags) {
    if (!tags) return normalize_url(s.url);
    auto i = static_cast<std::size_t>(s.step - 1);
    if (i < tags->size() && !(*tags)[i].empty()) return annotate::normalize_tag((*tags)[i][0]);
    return std::string(kUntagged);
}

}  // namespace

std::vector<std::string> journey_path(const Experiment& exp, const agent::Trace& trace, JourneyMode mode) {
    std::vector<std::string> path;
    const annotate::TraceTags* tags = nullptr;
    if (mode == JourneyMode::goal_level) {
        const auto& ann = exp.require_annotations();
        auto it = ann.tags.find(trace.run_id);
        if (it == ann.tags.end()) return path;
        tags = &it->second;
    }
    for (const auto& s : trace.steps) {
        auto node = step_node(s, tags);
        if (path.empty() || path.back() != node) path.push_back(std::move(node));
    }
    return path;
}

JourneyGraph journey_graph(const Experiment& exp, JourneyMode mode) {
    if (mode == JourneyMode::goal_level && (!exp.annotations || exp.annotations->tags.empty())) {
        throw DependencyError("goal-level journeys need intent tags; run annotate first");
    }
    JourneyGraph g;
    g.mode = mode;
    std::map<std::string, std::size_t> index;
    std::map<std::pair<std::string, std::string>, std::size_t> flows;
    std::map<std::string, std::set<std::string>> runs, issues;

    auto node_for = [&](const std::string& id) -> JourneyNode& {
        auto [it, fresh] = index.emplace(id, g.nodes.size());
        if (fresh) g.nodes.push_back({id, id, mode == JourneyMode::page_level ? "page" : "intent", 0, 0, 0, {}, {}});
        return g.nodes[it->second];
    };

    std::map<std::string, std::map<int, std::vector<std::string>>> issues_by_step;
    for (const auto& e : all_issues(exp)) issues_by_step[e.run_id][e.step].push_back(e.id);

    for (const auto& t : exp.traces) {
        if (!t.terminal.completed || t.steps.empty()) {
            g.skipped_runs.push_back(t.run_id);
            continue;
        }
        auto path = journey_path(exp, t, mode);
        if (path.empty()) {
            g.skipped_runs.push_back(t.run_id);
            continue;
        }
        for (std::size_t i = 0; i < path.size(); ++i) {
            auto& n = node_for(path[i]);
            ++n.visits;
            runs[n.id].insert(t.run_id);
            if (i > 0) ++flows[{path[i - 1], path[i]}];
        }
        ++node_for(path.front()).starts;
        ++node_for(path.back()).terminations;

        // Issues attach to the node the step was on.
        auto step_issues = issues_by_step.find(t.run_id);
        if (step_issues == issues_by_step.end()) continue;
        const annotate::TraceTags* tags =
            mode == JourneyMode::goal_level ? &exp.annotations->tags.at(t.run_id) : nullptr;
        for (const auto& s : t.steps) {
            auto it = step_issues->second.find(s.step);
            if (it != step_issues->second.end()) issues[step_node(s, tags)].insert(it->second.begin(), it->second.end());
        }
    }

    for (auto& n : g.nodes) {
        n.run_ids.assign(runs[n.id].begin(), runs[n.id].end());
        n.issue_ids.assign(issues[n.id].begin(), issues[n.id].end());
    }
    for (const auto& [key, flow] : flows) g.links.push_back({key.first, key.second, flow});
    return g;
}

Json to_json(const GoalSummary& g) {
    Json j;
    j["goal_id"] = g.goal_id;
    j["goal_text"] = g.goal_text;
    j["agents_attempting"] = g.agents_attempting;
    j["agents_with_issues"] = g.agents_with_issues;
    j["successes"] = g.successes;
    j["success_ratio"] = g.success_ratio;
    j["excluded_runs"] = g.excluded_runs;
    return j;
}

Json to_json(const std::vector<GoalSummary>& goals) {
    Json j = Json::array();
    for (const auto& g : goals) j.push_back(to_json(g));
    return j;
}

Json to_json(const TraitBreakdown& b) {
    Json entries = Json::array();
    for (const auto& e : b.entries) {
        Json traits = Json::array();
        for (const auto& t : e.traits) traits.push_back({{"dimension", t.dimension}, {"label", t.label}, {"value", t.value}});
        Json j;
        j["key"] = e.key;
        j["traits"] = traits;
        j["issue_count"] = e.issue_count;
        j["runs"] = e.runs;
        j["failures"] = e.failures;
        j["failure_rate"] = e.failure_rate;
        entries.push_back(std::move(j));
    }
    Json j;
    j["mode"] = to_string(b.mode);
    j["goal_id"] = b.goal_id;
    j["total_issues"] = b.total_issues;
    j["entries"] = entries;
    return j;
}

Json to_json(const IssueEntry& e) {
    Json j;
    j["id"] = e.id;
    j["run_id"] = e.run_id;
    j["persona_id"] = e.persona_id;
    j["goal_id"] = e.goal_id;
    j["step"] = e.step;
    j["occurrences"] = e.occurrences;
    auto record = annotate::to_json(e.record);
    for (const auto& [k, v] : record.items()) j[k] = v;
    return j;
}

Json to_json(const std::vector<IssueEntry>& issues) {
    Json j = Json::array();
    for (const auto& e : issues) j.push_back(to_json(e));
    return j;
}

Json to_json(const JourneyGraph& g) {
    Json nodes = Json::array();
    for (const auto& n : g.nodes) {
        Json j;
        j["id"] = n.id;
        j["label"] = n.label;
        j["kind"] = n.kind;
        j["starts"] = n.starts;
        j["terminations"] = n.terminations;
        j["visits"] = n.visits;
        j["run_ids"] = n.run_ids;
        j["issue_ids"] = n.issue_ids;
        nodes.push_back(std::move(j));
    }
    Json links = Json::array();
    for (const auto& l : g.links) links.push_back({{"source", l.source}, {"target", l.target}, {"flow", l.flow}});
    Json j;
    j["mode"] = to_string(g.mode);
    j["nodes"] = nodes;
    j["links"] = links;
    j["skipped_runs"] = g.skipped_runs;
    return j;
}

Json report_json(const Experiment& exp) {
    const auto& ann = exp.require_annotations();
    Json breakdowns = Json::object();
    for (const auto& g : exp.config.goals) {
        breakdowns[g.id] = {{"trait_centric", to_json(trait_breakdown(exp, g.id, BreakdownMode::trait_centric))},
                            {"composite_persona",
                             to_json(trait_breakdown(exp, g.id, BreakdownMode::composite_persona))}};
    }
    Json journeys = Json::object();
    journeys["page_level"] = to_json(journey_graph(exp, JourneyMode::page_level));
    if (!ann.tags.empty()) journeys["goal_level"] = to_json(journey_graph(exp, JourneyMode::goal_level));

    Json flags = Json::object();
    for (const auto& [id, problems] : ann.flags) flags[id] = problems;

    Json j;
    j["version"] = "1.0";
    j["experiment_id"] = exp.id;
    j["site"] = exp.config.site.name;
    j["personas"] = exp.personas.size();
    j["runs"] = exp.traces.size();
    j["goals"] = to_json(goal_summary(exp));
    j["issues"] = to_json(issue_list(exp, {}));
    j["trait_breakdowns"] = breakdowns;
    j["journeys"] = journeys;
    j["flags"] = flags;
    return j;
}

std::string report_markdown(const Experiment& exp) {
    std::string md = "# Usability report: " + exp.id + "\n\n";
    md += "Site: " + exp.config.site.name + "  \n";
    md += "Personas: " + std::to_string(exp.personas.size()) + ", runs: " + std::to_string(exp.traces.size()) + "\n\n";

    md += "## Goals\n\n| Goal | Attempting | With issues | Success ratio |\n|---|---:|---:|---:|\n";
    for (const auto& g : goal_summary(exp)) {
        md += "| " + g.goal_id + " | " + std::to_string(g.agents_attempting) + " | " +
              std::to_string(g.agents_with_issues) + " | " + format_ratio(g.success_ratio) + " |\n";
    }

    md += "\n## Issues by trait\n";
    for (const auto& g : exp.config.goals) {
        auto b = trait_breakdown(exp, g.id, BreakdownMode::trait_centric);
        md += "\n### " + g.id + "\n\n| Trait | Issues | Failure rate |\n|---|---:|---:|\n";
        for (const auto& e : b.entries) {
            md += "| " + e.key + " | " + std::to_string(e.issue_count) + " | " + format_ratio(e.failure_rate) + " |\n";
        }
    }

    md += "\n## Issues\n\n| Severity | Count | Element | Issue | Fix | Where |\n|---:|---:|---|---|---|---|\n";
    auto cell = [](const std::string& s) {
        std::string out;
        for (char c : text::collapse_whitespace(s)) out += c == '|' ? std::string("\\|") : std::string(1, c);
        return out;
    };
    for (const auto& e : issue_list(exp, {})) {
        md += "| " + std::to_string(e.record.issue_severity) + " | " + std::to_string(e.occurrences) + " | " +
              cell(e.record.element) + " | " + cell(e.record.type) + ": " + cell(e.record.reason) + " | " +
              cell(e.record.fix) + " | " + e.run_id + " step " + std::to_string(e.step) + " |\n";
    }
    return md;
}

}  // namespace uxsim::analyze
