// SPDX-License-Identifier: Apache-2.0

#include <cstdio>

#include "uxsim/annotate/annotate.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/common/parallel.hpp"
#include "uxsim/common/text.hpp"
#include "uxsim/prompts/templates.hpp"

namespace uxsim::annotate {

namespace {

std::string step_text(const env::StepEvent& e) {
    auto r = text::trim(e.reasoning);
    if (!r.empty()) return r;
    if (!e.intent.empty()) return e.intent;
    return "(no reasoning recorded) " + env::describe(e.action);
}

std::string marker(const agent::Trace& trace) { return "[tagging " + trace.run_id + "]"; }

}  // namespace

std::vector<StepTags> to_step_tags(const std::string& run_id, const TraceTags& tags) {
    std::vector<StepTags> out;
    for (std::size_t i = 0; i < tags.size(); ++i) out.push_back({run_id, static_cast<int>(i + 1), tags[i]});
    return out;
}

std::string render_tagging_prompt(int n_tags, std::size_t n_steps) {
    return text::substitute(prompts::kTaggingPrompt,
                            {{"self.n_tags", std::to_string(n_tags)}, {"len(steps)", std::to_string(n_steps)}});
}

std::vector<llm::ChatMessage> tagging_messages(const agent::Trace& trace, int n_tags, const std::string& feedback) {
    Json input = Json::array();
    for (const auto& s : trace.steps) input.push_back(step_text(s));
    std::string user = marker(trace) + "\nINPUT:\n" + dump_json(input, 2);
    if (!feedback.empty()) user += "\n\n" + feedback;
    return {{llm::Role::system, render_tagging_prompt(n_tags, trace.steps.size())}, {llm::Role::user, user}};
}

TraceTags parse_tags(std::string_view text_in, std::size_t expected_steps, int n_tags) {
    auto body = text::strip_code_fence(text_in);
    Json j;
    try {
        j = parse_json(body, "tagging output");
    } catch (const ParseError& e) {
        throw ValidationError(std::string("output is not valid JSON: ") + e.what());
    }
    if (!j.is_array()) throw ValidationError("output is not a JSON array");
    if (j.size() != expected_steps) {
        throw ValidationError("expected exactly " + std::to_string(expected_steps) + " arrays, got " +
                              std::to_string(j.size()));
    }
    TraceTags out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& inner = j[i];
        auto where = "step " + std::to_string(i + 1);
        if (!inner.is_array()) throw ValidationError(where + ": entry is not an array");
        if (inner.size() > static_cast<std::size_t>(n_tags)) {
            throw ValidationError(where + ": " + std::to_string(inner.size()) + " tags exceed the cap of " +
                                  std::to_string(n_tags));
        }
        std::vector<std::string> tags;
        for (const auto& t : inner) {
            if (!t.is_string() || text::trim(t.get<std::string>()).empty()) {
                throw ValidationError(where + ": tags must be non-empty strings");
            }
            tags.push_back(t.get<std::string>());
        }
        out.push_back(std::move(tags));
    }
    return out;
}

TraceTags tag_trace(const agent::Trace& trace, int n_tags, llm::Gateway& gateway, const std::string& feedback) {
    auto messages = tagging_messages(trace, n_tags, feedback);
    auto reply = gateway.complete(gateway.make_request(llm::Purpose::annotation, messages, trace.run_id));
    try {
        return parse_tags(reply.text, trace.steps.size(), n_tags);
    } catch (const ValidationError& first) {
        messages.push_back({llm::Role::assistant, reply.text});
        messages.push_back({llm::Role::user, marker(trace) + " Your output was rejected: " + first.what() +
                                                 ". Return only a JSON array of exactly " +
                                                 std::to_string(trace.steps.size()) + " arrays, each with at most " +
                                                 std::to_string(n_tags) + " tags."});
        auto retry = gateway.complete(gateway.make_request(llm::Purpose::annotation, messages, trace.run_id));
        try {
            return parse_tags(retry.text, trace.steps.size(), n_tags);
        } catch (const ValidationError& second) {
            throw AnnotationError("tagging " + trace.run_id + ": " + second.what());
        }
    }
}

std::string normalize_tag(std::string_view tag) { return text::collapse_whitespace(text::to_lower(tag)); }

std::set<std::string> tag_set(const TraceTags& tags) {
    std::set<std::string> out;
    for (const auto& step : tags) {
        for (const auto& t : step) {
            auto n = normalize_tag(t);
            if (!n.empty()) out.insert(std::move(n));
        }
    }
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t common = 0;
    for (const auto& x : a) common += b.count(x);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

TagScore score_tags(const std::vector<TaggedTrace>& traces) {
    std::vector<std::set<std::string>> sets;
    for (const auto& t : traces) sets.push_back(tag_set(t.tags));
    double intra_sum = 0, inter_sum = 0;
    std::size_t intra_n = 0, inter_n = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (std::size_t j = i + 1; j < traces.size(); ++j) {
            double s = jaccard(sets[i], sets[j]);
            if (traces[i].persona_id == traces[j].persona_id) {
                intra_sum += s;
                ++intra_n;
            } else {
                inter_sum += s;
                ++inter_n;
            }
        }
    }
    TagScore out;
    out.intra = intra_n ? intra_sum / static_cast<double>(intra_n) : 0.0;
    out.inter = inter_n ? inter_sum / static_cast<double>(inter_n) : 0.0;
    out.score = out.intra - out.inter;
    return out;
}

std::string feedback_text(double score) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", score);
    return std::string("Previous tagging consistency score: ") + buf +
           ". Improve cross-run consistency for same personas; reduce overlap across different personas.";
}

RefineResult refine_tagging(const std::vector<agent::Trace>& traces, llm::Gateway& gateway, int n_tags, int rounds,
                            double threshold, int pool) {
    if (rounds < 1) throw ValidationError("rounds must be >= 1");
    RefineResult best;
    double best_score = 0;
    std::string feedback;
    for (int round = 1; round <= rounds; ++round) {
        std::vector<std::optional<TraceTags>> tagged(traces.size());
        std::vector<std::string> errors(traces.size());
        parallel_for(traces.size(), pool, [&](std::size_t i) {
            try {
                tagged[i] = tag_trace(traces[i], n_tags, gateway, feedback);
            } catch (const AnnotationError& e) {
                errors[i] = e.what();
            }
        });
        std::vector<TaggedTrace> scored;
        RefineResult current;
        for (std::size_t i = 0; i < traces.size(); ++i) {
            if (tagged[i]) {
                scored.push_back({traces[i].run_id, traces[i].persona_id, *tagged[i]});
                current.tags[traces[i].run_id] = *tagged[i];
            } else {
                current.failures[traces[i].run_id] = errors[i];
            }
        }
        auto score = score_tags(scored);
        best.history.push_back(score);
        if (round == 1 || score.score > best_score) {
            best_score = score.score;
            best.tags = std::move(current.tags);
            best.failures = std::move(current.failures);
            best.best_round = static_cast<std::size_t>(round);
        }
        if (score.score >= threshold) break;
        feedback = feedback_text(score.score);
    }
    return best;
}

}  // namespace uxsim::annotate
