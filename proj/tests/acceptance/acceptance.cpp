// SPDX-License-Identifier: Apache-2.0

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails. Every check compares against an independent
// recount or a frozen oracle value, never against the code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "support.hpp"
#include "uxsim/agent/agent.hpp"
#include "uxsim/analyze/analyze.hpp"
#include "uxsim/annotate/annotate.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/env/environment.hpp"
#include "uxsim/env/page_state.hpp"
#include "uxsim/env/events.hpp"
#include "uxsim/llm/chat.hpp"
#include "uxsim/patch/patch.hpp"
#include "uxsim/persona/persona.hpp"
#include "uxsim/refine/refine.hpp"

using namespace uxsim;
namespace t = uxsim::testkit;

namespace {

class Check {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (!ok) failures_.push_back(what);
    }
    template <typename A, typename B>
    void equal(const A& a, const B& b, const std::string& what) {
        std::ostringstream os;
        if (!(a == b)) {
            os << what << " (got " << a << ", want " << b << ")";
            expect(false, os.str());
        } else {
            expect(true, what);
        }
    }
    void within(std::chrono::steady_clock::duration elapsed, std::chrono::milliseconds budget,
                const std::string& what) {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed);
        expect(ms <= budget, what + " took " + std::to_string(ms.count()) + " ms (budget " +
                                 std::to_string(budget.count()) + " ms)");
    }
    const std::vector<std::string>& failures() const { return failures_; }
    std::size_t checks() const { return checks_; }

private:
    std::size_t checks_ = 0;
    std::vector<std::string> failures_;
};

using Clock = std::chrono::steady_clock;

// ---- persona expansion ----

void persona_expansion(Check& c) {
    auto start = Clock::now();
    auto config = persona::load_config(t::source_path("fixtures/full-traits.json"));
    auto a = persona::expand_traits(config);
    auto b = persona::expand_traits(config);
    c.equal(a.size(), std::size_t{32}, "4 dimensions x 2 values x replication 2");
    c.expect(a == b, "expansion order is deterministic");
    std::set<std::string> ids;
    for (const auto& p : a) ids.insert(p.id);
    c.equal(ids.size(), std::size_t{32}, "persona ids are unique");
    if (a.size() == 32) {
        c.equal(a[0].id, std::string("p-budget-rushed-18_34-new-r1"), "first persona");
        c.equal(a[31].id, std::string("p-flexible-normal-55-returning-r2"), "last persona");
    }

    t::Rng rng(2024);
    for (int iter = 0; iter < 500; ++iter) {
        persona::ExperimentConfig cfg;
        cfg.site = {"s", "site", "index.html"};
        cfg.goals = {{"g", "goal"}};
        std::size_t closed_form = 1;
        int dims = rng.uniform(0, 5);
        for (int d = 0; d < dims; ++d) {
            persona::TraitDimension dim{"D" + std::to_string(d), {}, {}};
            int n = rng.uniform(1, 4);
            for (int v = 0; v < n; ++v) dim.values.push_back(rng.word(1, 3) + std::to_string(v));
            closed_form *= static_cast<std::size_t>(n);
            cfg.dimensions.push_back(dim);
        }
        cfg.replication = rng.uniform(1, 4);
        closed_form *= static_cast<std::size_t>(cfg.replication);
        auto got = persona::expand_traits(cfg).size();
        if (got != closed_form) {
            c.equal(got, closed_form, "random config " + std::to_string(iter) + " count");
            break;
        }
    }
    c.within(Clock::now() - start, std::chrono::milliseconds(1000), "persona expansion");
}

// ---- patch golden suite ----

void patch_golden_suite(Check& c) {
    auto start = Clock::now();
    auto base = t::load_fixture_text("fixtures/patch/base.html");
    std::set<std::string> actions;
    std::set<std::string> statuses;
    std::size_t cases = 0;
    for (const auto& entry : std::filesystem::directory_iterator(t::source_path("fixtures/patch/cases"))) {
        if (entry.path().extension() != ".json") continue;
        ++cases;
        auto name = entry.path().stem().string();
        auto spec = parse_json(fs::read_file(entry.path()), name);
        auto ps = patch::patchset_from_json(spec.at("patchset"));
        auto want_status = spec.at("expect").at("status").get<std::string>();
        auto expected = fs::read_file(entry.path().parent_path() / (name + ".after.html"));
        auto result = patch::apply_patchset(base, ps);
        c.equal(std::string(patch::to_string(result.status)), want_status, name + " status");
        c.expect(result.html == expected, name + " output is byte-exact");
        if (want_status == "ok") {
            for (const auto& p : ps.patches) actions.insert(std::string(patch::to_string(p.action)));
            c.expect(patch::apply_patchset(base, ps).html == result.html, name + " is deterministic");
        } else {
            c.expect(result.html == base, name + " returns the input byte-identical");
            auto want_index = spec.at("expect").at("failing_index").get<std::size_t>();
            c.expect(result.failing_index == want_index, name + " failing index");
        }
        statuses.insert(want_status);
    }
    c.equal(actions.size(), std::size_t{11}, "golden fixtures cover every action");
    c.expect(statuses.count("ambiguous") && statuses.count("impossible"), "ambiguous and impossible fixtures exist");
    c.expect(cases >= 14, "golden suite has " + std::to_string(cases) + " cases");
    c.within(Clock::now() - start, std::chrono::milliseconds(5000), "patch golden suite");
}

// ---- tagging schema ----

void tagging_schema(Check& c) {
    const std::string example = R"([["browse product options"],["locate cheapest product"],["select item for purchase"]])";
    auto trace = t::make_trace("r1", "p1", "g1", 3);

    // Array-count violation, then the valid example.
    {
        auto gw = t::scripted_gateway({{"[tagging r1]", R"([["browse product options"],["locate cheapest product"]])"},
                                       {"rejected", example}});
        auto tags = annotate::tag_trace(trace, 3, *gw);
        auto ex = gw->transcript();
        c.equal(ex.size(), std::size_t{2}, "count violation triggers exactly one corrective re-prompt");
        if (ex.size() == 2) {
            const auto* last = ex[1].request.last_user_message();
            c.expect(last && last->content.find("exactly 3") != std::string::npos,
                     "corrective re-prompt states the expected step count");
        }
        c.expect(Json(tags).dump() == example, "valid example round-trips verbatim");
    }
    // Per-step cap violation with n_tags = 1.
    {
        auto gw = t::scripted_gateway(
            {{"[tagging r1]", R"([["a","b"],["c"],["d"]])"}, {"rejected", R"([["a"],["c"],["d"]])"}});
        auto tags = annotate::tag_trace(trace, 1, *gw);
        c.equal(gw->transcript().size(), std::size_t{2}, "per-step cap violation triggers a re-prompt");
        c.equal(tags.size(), std::size_t{3}, "corrected tags accepted");
    }
    // Two violations in a row surface as an annotation error.
    {
        auto gw = t::scripted_gateway({{"*", "[[\"a\"]]"}, {"*", "not json"}});
        bool threw = false;
        try {
            annotate::tag_trace(trace, 3, *gw);
        } catch (const AnnotationError&) {
            threw = true;
        }
        c.expect(threw, "second violation raises an annotation error");
    }
    // Direct schema rejections.
    auto rejects = [&](const std::string& text, int n_tags, const std::string& what) {
        bool threw = false;
        try {
            annotate::parse_tags(text, 3, n_tags);
        } catch (const ValidationError&) {
            threw = true;
        }
        c.expect(threw, what);
    };
    rejects(R"([["a"],["b"]])", 3, "too few step arrays rejected");
    rejects(R"([["a"],["b"],["c"],["d"]])", 3, "too many step arrays rejected");
    rejects(R"([["a","b","c","d"],["b"],["c"]])", 3, "more than n_tags tags rejected");
    rejects(R"({"tags": []})", 3, "non-array output rejected");
    c.expect(Json(annotate::parse_tags(example, 3, 3)).dump() == example, "example parses verbatim");
}

// ---- similarity score oracle ----

std::string oracle_norm(const std::string& tag) {
    std::string out;
    bool space = false;
    for (char ch : tag) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
}

// Brute-force pairwise Jaccard over trace-level tag sets.
std::pair<double, double> oracle_score(const std::vector<annotate::TaggedTrace>& traces) {
    std::vector<std::set<std::string>> sets;
    for (const auto& tr : traces) {
        std::set<std::string> s;
        for (const auto& step : tr.tags) {
            for (const auto& tag : step) s.insert(oracle_norm(tag));
        }
        sets.push_back(s);
    }
    double intra_sum = 0, inter_sum = 0;
    int intra_n = 0, inter_n = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (std::size_t j = i + 1; j < traces.size(); ++j) {
            std::size_t common = 0;
            for (const auto& x : sets[i]) common += sets[j].count(x);
            std::size_t uni = sets[i].size() + sets[j].size() - common;
            double jac = uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni);
            if (traces[i].persona_id == traces[j].persona_id) {
                intra_sum += jac;
                ++intra_n;
            } else {
                inter_sum += jac;
                ++inter_n;
            }
        }
    }
    return {intra_n ? intra_sum / intra_n : 0.0, inter_n ? inter_sum / inter_n : 0.0};
}

void similarity_score_oracle(Check& c) {
    auto start = Clock::now();
    const std::vector<std::string> vocab = {"browse", "Browse ", "compare  prices", "compare prices", "checkout",
                                            "search", "filter", "select size", "abandon", "review cart"};
    t::Rng rng(99);
    std::size_t mismatches = 0, out_of_bounds = 0;
    for (int iter = 0; iter < 10000; ++iter) {
        std::vector<annotate::TaggedTrace> traces;
        int n = rng.uniform(0, 6);
        int personas = rng.uniform(1, 3);
        for (int i = 0; i < n; ++i) {
            annotate::TaggedTrace tr;
            tr.run_id = "r" + std::to_string(i);
            tr.persona_id = "p" + std::to_string(rng.uniform(1, personas));
            int steps = rng.uniform(0, 4);
            for (int s = 0; s < steps; ++s) {
                std::vector<std::string> tags;
                int k = rng.uniform(0, 3);
                for (int j = 0; j < k; ++j) tags.push_back(rng.pick(vocab));
                tr.tags.push_back(tags);
            }
            traces.push_back(tr);
        }
        auto got = annotate::score_tags(traces);
        auto [intra, inter] = oracle_score(traces);
        if (std::abs(got.intra - intra) > 1e-12 || std::abs(got.inter - inter) > 1e-12 ||
            std::abs(got.score - (intra - inter)) > 1e-12) {
            ++mismatches;
        }
        if (!(got.score >= -1.0 && got.score <= 1.0 && got.intra >= 0.0 && got.intra <= 1.0 && got.inter >= 0.0 &&
              got.inter <= 1.0)) {
            ++out_of_bounds;
        }
    }
    c.equal(mismatches, std::size_t{0}, "score_tags matches the brute-force oracle within 1e-12");
    c.equal(out_of_bounds, std::size_t{0}, "-1 <= score <= 1 and intra, inter in [0, 1]");

    auto frozen = t::load_fixture_json("fixtures/oracles/score_cases.json");
    for (const auto& [name, cs] : frozen.at("cases").items()) {
        std::vector<annotate::TaggedTrace> traces;
        int i = 0;
        for (const auto& tr : cs.at("traces")) {
            traces.push_back({"r" + std::to_string(i++), tr.at("persona").get<std::string>(),
                              tr.at("tags").get<annotate::TraceTags>()});
        }
        auto got = annotate::score_tags(traces);
        c.expect(std::abs(got.score - cs.at("score").get<double>()) <= 1e-12, "frozen case " + name);
    }
    c.within(Clock::now() - start, std::chrono::milliseconds(10000), "score oracle");
}

// ---- issue report validation ----

Json valid_report() {
    return Json::parse(R"({
      "version": "1.0",
      "expected_steps": 2,
      "steps": [
        {"step": 1, "issues": []},
        {"step": 2, "issues": [{
          "type": "Add to cart looks disabled",
          "element": "button#add-to-cart",
          "reason": "The button is grey on grey.",
          "fix": "Give the button an active style.",
          "upt_codes": ["C2", "A2"],
          "upt_explanation": "The styling signals that the control cannot be used.",
          "issue_severity": 4
        }]}
      ]
    })");
}

void issue_report_validation(Check& c) {
    auto rejected = [&](Json j, const std::string& what, int expected_steps = 2) {
        bool threw = false;
        try {
            annotate::parse_issue_report("```json\n" + j.dump() + "\n```", expected_steps);
        } catch (const ValidationError&) {
            threw = true;
        }
        c.expect(threw, what);
    };
    auto with = [](const std::function<void(Json&)>& edit) {
        auto j = valid_report();
        edit(j);
        return j;
    };
    rejected(with([](Json& j) { j["steps"][1]["issues"][0]["issue_severity"] = 5; }), "severity 5 rejected");
    rejected(with([](Json& j) { j["steps"][1]["issues"][0]["issue_severity"] = -1; }), "severity -1 rejected");
    rejected(with([](Json& j) { j["steps"][1]["issues"][0]["upt_codes"] = Json::array({"F1"}); }),
             "upt code F1 rejected");
    rejected(with([](Json& j) { j["steps"][1]["issues"][0]["upt_codes"] = Json::array({"A5"}); }),
             "upt code A5 rejected");
    rejected(valid_report(), "|steps| != expected_steps rejected", 3);
    rejected(with([](Json& j) { j["expected_steps"] = 3; }), "declared expected_steps mismatch rejected");
    rejected(with([](Json& j) { j["steps"].erase(1); }), "missing step rejected");

    std::size_t accepted = 0;
    for (auto code : annotate::kUptCodes) {
        auto j = with([&](Json& r) { r["steps"][1]["issues"][0]["upt_codes"] = Json::array({std::string(code)}); });
        try {
            annotate::parse_issue_report(j.dump(), 2);
            ++accepted;
        } catch (const Error&) {
        }
    }
    c.equal(accepted, std::size_t{19}, "all 19 taxonomy codes accepted");

    auto original = valid_report();
    auto report = annotate::parse_issue_report(original.dump(), 2);
    c.expect(dump_json(annotate::to_json(report)) == dump_json(original), "valid report round-trips bit-exact");
    auto again = annotate::issue_report_from_json(annotate::to_json(report));
    c.expect(again == report, "serialize then parse is the identity");
}

// ---- step cap ----

void step_cap(Check& c) {
    auto config = t::shop_config();
    auto personas = persona::expand_traits(config);
    const auto& goal = config.goals.front();
    auto run_once = [&](int max_steps) {
        auto cfg = config;
        cfg.max_steps = max_steps;
        // Never finishes: scrolls forever.
        auto gw = t::gateway_for(std::make_shared<llm::FunctionProvider>(
            [](const llm::ChatRequest&) { return t::decision_reply("scroll", std::nullopt, std::string("300")); }));
        t::TempDir dir;
        env::BlobStore blobs(dir / "blobs");
        env::EventLog log(dir / "events.ndjson");
        env::SnapshotEmitter emitter(blobs, log, nullptr);
        env::OfflineEnvironment environment(cfg.site.url);
        auto trace = agent::run_simulation(cfg, personas.front(), goal, environment, *gw, emitter);
        return std::make_pair(trace, gw->transcript().size());
    };
    auto [trace, calls] = run_once(25);
    c.equal(trace.steps.size(), std::size_t{25}, "adversarial mock yields exactly 25 steps");
    c.equal(trace.terminal.reason, std::string(agent::kReasonStepCap), "terminal reason is the step cap");
    c.expect(trace.terminal.completed && !trace.terminal.success.has_value(), "capped trace completed, no success");
    c.equal(calls, std::size_t{25}, "one model call per step");
    for (int cap : {1, 3, 7}) {
        auto [capped, n] = run_once(cap);
        c.equal(capped.steps.size(), static_cast<std::size_t>(cap), "cap " + std::to_string(cap) + " respected");
    }
}

// ---- end-to-end determinism ----

struct PipelineOutputs {
    std::string issues_json;
    std::string goals;
    std::string page_journey;
    std::string goal_journey;
    std::string events;  // every run's log without timestamps
};

PipelineOutputs pipeline_outputs(const std::filesystem::path& root) {
    auto p = t::run_shop_pipeline(root);
    auto exp = p.load();
    PipelineOutputs out;
    out.issues_json = fs::read_file(p.dir() / "annotations" / "issues.json");
    out.goals = dump_json(analyze::to_json(analyze::goal_summary(exp)));
    out.page_journey = dump_json(analyze::to_json(analyze::journey_graph(exp, analyze::JourneyMode::page_level)));
    out.goal_journey = dump_json(analyze::to_json(analyze::journey_graph(exp, analyze::JourneyMode::goal_level)));
    for (const auto& tr : exp.traces) {
        for (const auto& s : tr.steps) out.events += dump_json(env::to_json(s, false), -1) + "\n";
    }
    return out;
}

void end_to_end_determinism(Check& c) {
    auto start = Clock::now();
    t::TempDir a, b;
    auto x = pipeline_outputs(a.path());
    auto y = pipeline_outputs(b.path());
    c.expect(x.issues_json == y.issues_json, "issues.json bit-identical across runs");
    c.expect(x.goals == y.goals, "goal summaries identical");
    c.expect(x.page_journey == y.page_journey, "page-level journey graphs identical");
    c.expect(x.goal_journey == y.goal_journey, "goal-level journey graphs identical");
    c.expect(x.events == y.events, "step logs identical apart from timestamps");

    // And the content matches the independently derived expectations.
    auto oracle = t::load_fixture_json("fixtures/oracles/shop_expected.json");
    auto goals = Json::parse(x.goals);
    for (const auto& want : oracle.at("goals")) {
        bool found = false;
        for (const auto& g : goals) {
            if (g.at("goal_id") != want.at("goal_id")) continue;
            found = true;
            for (const char* key : {"agents_attempting", "agents_with_issues", "successes"}) {
                c.expect(g.at(key) == want.at(key), want.at("goal_id").get<std::string>() + " " + key);
            }
            c.expect(std::abs(g.at("success_ratio").get<double>() - want.at("success_ratio").get<double>()) < 1e-12,
                     "success ratio");
        }
        c.expect(found, "goal " + want.at("goal_id").get<std::string>() + " summarized");
    }
    std::size_t issues = 0;
    const auto issue_doc = Json::parse(x.issues_json);
    for (const auto& [run, report] : issue_doc.at("runs").items()) {
        for (const auto& s : report.at("steps")) issues += s.at("issues").size();
        c.expect(report.at("steps").size() == oracle.at("runs").at(run).at("steps").get<std::size_t>(),
                 run + " step count");
    }
    c.equal(issues, oracle.at("total_issues").get<std::size_t>(), "total issue count");
    c.within(Clock::now() - start, std::chrono::milliseconds(60000), "two pipeline runs");
}

// ---- journey conservation ----

std::string oracle_url(const std::string& url) {
    auto s = url.substr(0, url.find_first_of("?#"));
    while (s.size() > 1 && s.back() == '/') s.pop_back();
    return s.empty() ? "/" : s;
}

void check_graph(Check& c, const analyze::JourneyGraph& g, const std::map<std::string, std::vector<std::string>>& paths,
                 const std::string& label) {
    std::map<std::pair<std::string, std::string>, std::size_t> flows;
    std::map<std::string, long> starts, ends, visits;
    for (const auto& [run, raw] : paths) {
        std::vector<std::string> path;
        for (const auto& n : raw) {
            if (path.empty() || path.back() != n) path.push_back(n);
        }
        if (path.empty()) continue;
        for (std::size_t i = 0; i < path.size(); ++i) {
            ++visits[path[i]];
            if (i > 0) ++flows[{path[i - 1], path[i]}];
        }
        ++starts[path.front()];
        ++ends[path.back()];
    }
    std::map<std::pair<std::string, std::string>, std::size_t> got;
    std::map<std::string, long> in, out;
    for (const auto& l : g.links) {
        got[{l.source, l.target}] = l.flow;
        in[l.target] += static_cast<long>(l.flow);
        out[l.source] += static_cast<long>(l.flow);
    }
    c.expect(got == flows, label + " links equal the brute-force transition recount");
    c.equal(g.nodes.size(), visits.size(), label + " node count");
    for (const auto& n : g.nodes) {
        long lhs = in[n.id] - out[n.id];
        long rhs = static_cast<long>(n.terminations) - static_cast<long>(n.starts);
        c.expect(lhs == rhs, label + " conservation at " + n.id);
        c.expect(static_cast<long>(n.starts) == starts[n.id] && static_cast<long>(n.terminations) == ends[n.id] &&
                     static_cast<long>(n.visits) == visits[n.id],
                 label + " starts/terminations/visits at " + n.id);
    }
}

void journey_conservation(Check& c) {
    t::TempDir root;
    auto p = t::run_shop_pipeline(root.path());
    auto exp = p.load();
    auto dir = p.dir();

    // Recount straight from the persisted logs and tag file.
    std::map<std::string, std::vector<std::string>> page_paths, intent_paths;
    auto tags = parse_json(fs::read_file(dir / "annotations" / "tags.json"), "tags.json").at("runs");
    for (const auto& run : p.store->record(p.experiment_id).run_ids) {
        for (const auto& e : env::EventLog::read(dir / "runs" / run / "events.ndjson")) {
            page_paths[run].push_back(oracle_url(e.url));
            const auto& step_tags = tags.at(run).at(static_cast<std::size_t>(e.step - 1));
            intent_paths[run].push_back(step_tags.empty() ? "(untagged)"
                                                          : oracle_norm(step_tags.at(0).get<std::string>()));
        }
    }
    auto page = analyze::journey_graph(exp, analyze::JourneyMode::page_level);
    auto goal = analyze::journey_graph(exp, analyze::JourneyMode::goal_level);
    check_graph(c, page, page_paths, "page-level");
    check_graph(c, goal, intent_paths, "goal-level");

    auto oracle = t::load_fixture_json("fixtures/oracles/shop_expected.json");
    for (const auto& [key, graph] : {std::pair{"journey_page_level", &page}, std::pair{"journey_goal_level", &goal}}) {
        const auto& want = oracle.at(key);
        std::vector<std::tuple<std::string, std::string, std::size_t>> a, b;
        for (const auto& l : want.at("links")) {
            a.emplace_back(l.at("source").get<std::string>(), l.at("target").get<std::string>(),
                           l.at("flow").get<std::size_t>());
        }
        for (const auto& l : graph->links) b.emplace_back(l.source, l.target, l.flow);
        c.expect(a == b, std::string(key) + " matches the frozen oracle links");
        std::vector<std::string> want_order, got_order;
        for (const auto& n : want.at("nodes")) want_order.push_back(n.at("id").get<std::string>());
        for (const auto& n : graph->nodes) got_order.push_back(n.id);
        c.expect(want_order == got_order, std::string(key) + " node order matches the frozen oracle");
    }
}

// ---- preview replay contract ----

std::string recorded_response(const std::string& run_id, int step) {
    auto script = t::load_fixture_json("fixtures/transcripts/simulate.json");
    auto marker = "[session " + run_id + "] Step " + std::to_string(step) + " of";
    for (const auto& e : script.at("entries")) {
        if (e.at("match").get<std::string>().find(marker) != std::string::npos) return e.at("response");
    }
    throw NotFoundError("no scripted response for " + marker);
}

void preview_replay_contract(Check& c) {
    t::TempDir root;
    auto p = t::run_shop_pipeline(root.path());
    auto exp = p.load();
    env::BlobStore blobs(p.dir() / "blobs");
    auto oracle = t::load_fixture_json("fixtures/oracles/shop_expected.json");
    auto issue_id = oracle.at("b6_issue").get<std::string>();
    const auto issues = analyze::all_issues(exp);
    const auto& issue = analyze::find_issue(issues, issue_id);
    c.equal(issue.record.type, std::string("Add to cart looks disabled"), "fixture issue is the B6 analog");
    const auto* trace = exp.find_trace(issue.run_id);
    if (!trace) {
        c.expect(false, "issue run present");
        return;
    }
    const env::StepEvent* step = nullptr;
    for (const auto& s : trace->steps) {
        if (s.step == issue.step) step = &s;
    }
    if (!step) {
        c.expect(false, "issue step present");
        return;
    }

    // Unmodified snapshot: a deterministic mock that returns the recorded
    // decision only when it sees the recorded prompt byte for byte.
    {
        auto original = recorded_response(issue.run_id, issue.step);
        auto recorded_prompt = step->prompt_text;
        auto gw = t::gateway_for(std::make_shared<llm::FunctionProvider>([=](const llm::ChatRequest& r) {
            if (llm::render_prompt(r.messages) == recorded_prompt) return original;
            if (r.context == issue_id + "#judge") return std::string(R"({"verdict":"unresolved","summary":"same"})");
            return t::decision_reply("go_back");
        }));
        auto report = refine::preview_replay(exp, blobs, issue_id, step->raw_html_ref, *gw);
        c.expect(!report.action_changed, "unmodified snapshot reproduces the original action");
        c.expect(report.new_action == step->action, "replayed action equals the recorded one");
        c.expect(!report.issue_resolved, "unresolved verdict carried through");
    }

    // Patched B6 fixture with a scripted divergent decision.
    {
        patch::PatchSet ps;
        ps.patches.push_back({"#add-to-cart", patch::Action::remove_class, "add-to-cart", std::nullopt, "drop grey"});
        ps.patches.push_back({"", patch::Action::inject_style,
                              "#add-to-cart { background: #1a7f37; color: #fff; cursor: pointer; }", std::nullopt,
                              "active style"});
        auto patched = patch::apply_patchset(blobs.get(step->raw_html_ref), ps);
        c.equal(std::string(patch::to_string(patched.status)), std::string("ok"), "B6 fix applies");
        auto ref = blobs.put(patched.html);
        auto gw = t::scripted_gateway("fixtures/transcripts/preview_b6_changed.json");
        auto report = refine::preview_replay(exp, blobs, issue_id, ref, *gw);
        c.expect(report.action_changed, "patched snapshot changes the action");
        c.expect(report.new_action.kind == env::ActionKind::click, "new action is a click");
        c.expect(report.issue_resolved, "judge reports the issue resolved");

        auto ex = gw->transcript();
        c.equal(ex.size(), std::size_t{2}, "replay and judgment are two gateway calls");
        if (ex.size() == 2) {
            c.expect(ex[0].seq != ex[1].seq, "distinct exchanges");
            c.expect(ex[0].request.context == issue_id, "first call is the replay");
            c.expect(ex[1].request.context == issue_id + "#judge", "second call is the judgment");
            const auto* replay_user = ex[0].request.last_user_message();
            const auto* judge_user = ex[1].request.last_user_message();
            c.expect(replay_user && replay_user->content.find("[session " + issue.run_id + "]") != std::string::npos,
                     "replay prompt carries the session marker");
            c.expect(judge_user && judge_user->content.find("[judge " + issue_id + "]") != std::string::npos,
                     "judgment prompt carries the judge marker");
            auto judge_text = llm::render_prompt(ex[1].request.messages);
            c.expect(judge_text.find(ex[0].response.text) == std::string::npos,
                     "judgment does not see the replay completion");
            c.expect(judge_text.find(env::kStateBegin) == std::string::npos,
                     "judgment is a separate conversation");
        }
    }
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
        {"persona-expansion", persona_expansion},
        {"patch-golden-suite", patch_golden_suite},
        {"tagging-schema", tagging_schema},
        {"similarity-score-oracle", similarity_score_oracle},
        {"issue-report-validation", issue_report_validation},
        {"step-cap", step_cap},
        {"end-to-end-determinism", end_to_end_determinism},
        {"journey-conservation", journey_conservation},
        {"preview-replay-contract", preview_replay_contract},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Check c;
        auto start = Clock::now();
        try {
            fn(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
        if (c.failures().empty()) {
            std::printf("PASS %-26s %4zu checks  %6lld ms\n", name.c_str(), c.checks(), static_cast<long long>(ms));
        } else {
            ++failed;
            std::printf("FAIL %-26s %zu/%zu checks failed\n", name.c_str(), c.failures().size(), c.checks());
            for (const auto& f : c.failures()) std::printf("     - %s\n", f.c_str());
        }
    }
    std::printf("%s: %zu criteria, %d failed\n", failed ? "FAIL" : "PASS", criteria.size(), failed);
    return failed ? 1 : 0;
}
