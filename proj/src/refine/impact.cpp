// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <set>

#include "uxsim/common/error.hpp"
#include "uxsim/html/parser.hpp"
#include "uxsim/html/selector.hpp"
#include "uxsim/refine/refine.hpp"

namespace uxsim::refine {

namespace {

std::set<std::string> goal_tag_set(const analyze::Experiment& exp, const std::string& goal_id) {
    std::set<std::string> out;
    const auto& tags = exp.annotations->tags;
    for (const auto& t : exp.traces) {
        if (t.goal_id != goal_id) continue;
        auto it = tags.find(t.run_id);
        if (it == tags.end()) continue;
        auto s = annotate::tag_set(it->second);
        out.insert(s.begin(), s.end());
    }
    return out;
}

}  // namespace

Json to_json(const std::vector<ImpactedRun>& runs) {
    Json j = Json::array();
    for (const auto& r : runs) {
        j.push_back({{"persona_id", r.persona_id}, {"run_id", r.run_id}, {"step", r.step}, {"goal_id", r.goal_id}});
    }
    return j;
}

std::vector<std::string> adjacent_goals(const analyze::Experiment& exp, const std::string& goal_id, double threshold) {
    exp.require_annotations();
    bool known = std::any_of(exp.config.goals.begin(), exp.config.goals.end(),
                             [&](const persona::Goal& g) { return g.id == goal_id; });
    if (!known) throw NotFoundError("unknown goal '" + goal_id + "'");
    auto reference = goal_tag_set(exp, goal_id);
    std::vector<std::string> out;
    for (const auto& g : exp.config.goals) {
        if (g.id == goal_id) {
            out.push_back(g.id);
            continue;
        }
        auto other = goal_tag_set(exp, g.id);
        // Goals without tags carry no evidence of adjacency.
        if (reference.empty() || other.empty()) continue;
        if (annotate::jaccard(reference, other) >= threshold) out.push_back(g.id);
    }
    return out;
}

std::vector<ImpactedRun> impacted_personas(const analyze::Experiment& exp, const env::BlobStore& blobs,
                                           const std::string& selector_text, const std::string& goal_id,
                                           double threshold) {
    auto selector = html::Selector::parse(selector_text);
    auto goals = adjacent_goals(exp, goal_id, threshold);
    std::map<std::string, bool> hits;  // "<ref>\x1f<target selector>" -> matched

    std::vector<ImpactedRun> out;
    for (const auto& t : exp.traces) {
        if (std::find(goals.begin(), goals.end(), t.goal_id) == goals.end()) continue;
        for (const auto& s : t.steps) {
            if (!s.action.target_index) continue;
            const auto* el = s.page_state.element(*s.action.target_index);
            if (!el) continue;
            auto key = s.raw_html_ref + "\x1f" + el->selector;
            auto cached = hits.find(key);
            if (cached == hits.end()) {
                auto doc = html::parse_document(blobs.get(s.raw_html_ref));
                auto matches = selector.query_all(*doc);
                auto* target = html::Selector::parse(el->selector).query_first(*doc);
                bool hit = target && std::find(matches.begin(), matches.end(), target) != matches.end();
                cached = hits.emplace(key, hit).first;
            }
            if (cached->second) out.push_back({t.persona_id, t.run_id, s.step, t.goal_id});
        }
    }
    std::sort(out.begin(), out.end(), [](const ImpactedRun& a, const ImpactedRun& b) {
        return std::tie(a.persona_id, a.run_id, a.step) < std::tie(b.persona_id, b.run_id, b.step);
    });
    return out;
}

}  // namespace uxsim::refine
