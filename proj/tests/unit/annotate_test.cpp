// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "uxsim/annotate/annotate.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/llm/chat.hpp"

using namespace uxsim;
using annotate::TraceTags;

namespace {

const char* kReport = R"({"version":"1.0","expected_steps":2,"steps":[{"step":1,"issues":[]},{"step":2,"issues":[
  {"type":"Hidden price","element":"span.price","reason":"Price shows only after login.","fix":"Show it.",
   "upt_codes":["B1"],"upt_explanation":"Information is withheld.","issue_severity":3}]}]})";

// Tags from the frozen refinement cases: round 1 before feedback, round 2
// once the prompt carries a score.
std::string refine_reply(const llm::ChatRequest& r) {
    auto prompt = llm::render_prompt(r.messages);
    bool second = prompt.find("Previous tagging consistency score") != std::string::npos;
    auto cases = testkit::load_fixture_json("fixtures/oracles/score_cases.json").at("cases");
    const auto& traces = cases.at(second ? "refine_round_2" : "refine_round_1").at("traces");
    for (std::size_t i = 0; i < 3; ++i) {
        if (r.last_user_message()->content.find("[tagging r" + std::to_string(i + 1) + "]") != std::string::npos) {
            return traces.at(i).at("tags").dump();
        }
    }
    throw ValidationError("unexpected request");
}

std::vector<agent::Trace> refine_traces() {
    return {testkit::make_trace("r1", "p1", "g", 2), testkit::make_trace("r2", "p1", "g", 2),
            testkit::make_trace("r3", "p2", "g", 2)};
}

}  // namespace

TEST(Tags, ParseAcceptsFencedArrays) {
    auto tags = annotate::parse_tags("```json\n[[\"a\", \"b\"], []]\n```", 2, 3);
    EXPECT_EQ(tags, (TraceTags{{"a", "b"}, {}}));
    EXPECT_THROW(annotate::parse_tags(R"([["a"], [""]])", 2, 3), ValidationError);
    EXPECT_THROW(annotate::parse_tags(R"([["a"], [3]])", 2, 3), ValidationError);
    EXPECT_THROW(annotate::parse_tags("not json", 2, 3), ValidationError);
}

TEST(Tags, NormalizationAndJaccard) {
    EXPECT_EQ(annotate::normalize_tag("  Compare   Prices "), "compare prices");
    EXPECT_DOUBLE_EQ(annotate::jaccard({}, {}), 1.0);
    EXPECT_DOUBLE_EQ(annotate::jaccard({"a"}, {}), 0.0);
    EXPECT_DOUBLE_EQ(annotate::jaccard({"a", "b"}, {"b", "c"}), 1.0 / 3.0);
    EXPECT_EQ(annotate::tag_set({{"A"}, {"a ", "b"}}), (std::set<std::string>{"a", "b"}));
}

TEST(Tags, ScoreMatchesFrozenCases) {
    auto cases = testkit::load_fixture_json("fixtures/oracles/score_cases.json").at("cases");
    for (const auto& [name, c] : cases.items()) {
        std::vector<annotate::TaggedTrace> traces;
        int i = 0;
        for (const auto& t : c.at("traces")) {
            traces.push_back({"r" + std::to_string(i++), t.at("persona"), t.at("tags").get<TraceTags>()});
        }
        auto s = annotate::score_tags(traces);
        EXPECT_NEAR(s.intra, c.at("intra").get<double>(), 1e-12) << name;
        EXPECT_NEAR(s.inter, c.at("inter").get<double>(), 1e-12) << name;
        EXPECT_NEAR(s.score, c.at("score").get<double>(), 1e-12) << name;
    }
}

TEST(Tags, TagTraceRePromptsOnce) {
    auto trace = testkit::make_trace("r1", "p1", "g", 2);
    auto gw = testkit::scripted_gateway({{"[tagging r1]", "[[\"a\"]]"}, {"rejected", "[[\"a\"],[\"b\"]]"}});
    EXPECT_EQ(annotate::tag_trace(trace, 3, *gw), (TraceTags{{"a"}, {"b"}}));
    auto ex = gw->transcript();
    ASSERT_EQ(ex.size(), 2u);
    EXPECT_EQ(ex[0].request.tag, llm::Purpose::annotation);
    EXPECT_EQ(ex[0].request.temperature, 0.0);
    auto retry = ex[1].request.last_user_message()->content;
    EXPECT_NE(retry.find("[tagging r1] Your output was rejected:"), std::string::npos);
    EXPECT_NE(retry.find("exactly 2 arrays, each with at most 3 tags"), std::string::npos);
}

TEST(Refine, ThresholdMinusOneRunsOneRound) {
    auto gw = testkit::gateway_for(std::make_shared<llm::FunctionProvider>(refine_reply));
    auto r = annotate::refine_tagging(refine_traces(), *gw, 3, 3, -1.0);
    ASSERT_EQ(r.history.size(), 1u);
    EXPECT_EQ(r.best_round, 1u);
    EXPECT_NEAR(r.history[0].score, -1.0 / 3.0, 1e-12);
}

TEST(Refine, FeedbackRoundImprovesAndStops) {
    auto gw = testkit::gateway_for(std::make_shared<llm::FunctionProvider>(refine_reply));
    auto r = annotate::refine_tagging(refine_traces(), *gw, 3, 3, 0.5);
    ASSERT_EQ(r.history.size(), 2u);
    EXPECT_EQ(r.best_round, 2u);
    EXPECT_NEAR(r.history[1].score, 1.0, 1e-12);
    EXPECT_EQ(r.tags.at("r3"), (TraceTags{{"c"}, {"d"}}));
    EXPECT_NE(annotate::feedback_text(-1.0 / 3.0).find("-0.3333"), std::string::npos);
}

TEST(Refine, UnreachableThresholdSpendsAllRoundsKeepingBest) {
    auto gw = testkit::gateway_for(std::make_shared<llm::FunctionProvider>(refine_reply));
    auto r = annotate::refine_tagging(refine_traces(), *gw, 3, 3, 2.0);
    EXPECT_EQ(r.history.size(), 3u);
    EXPECT_EQ(r.best_round, 2u);
    EXPECT_THROW(annotate::refine_tagging(refine_traces(), *gw, 3, 0, 0.0), ValidationError);
}

TEST(Issues, ValidReportRoundTrips) {
    auto report = annotate::parse_issue_report(kReport, 2, "r1");
    ASSERT_EQ(report.steps.at(1).issues.size(), 1u);
    EXPECT_EQ(report.steps[1].issues[0].run_id, "r1");
    EXPECT_EQ(report.steps[1].issues[0].step, 2);
    EXPECT_EQ(annotate::to_json(report), parse_json(kReport, "report"));
}

TEST(Issues, SchemaViolationsAreRejected) {
    auto mutate = [](const std::function<void(Json&)>& f) {
        auto j = parse_json(kReport, "report");
        f(j);
        return j.dump();
    };
    const Json::json_pointer issue("/steps/1/issues/0");
    for (const auto& bad : {
             mutate([&](Json& j) { j[issue]["issue_severity"] = 7; }),
             mutate([&](Json& j) { j[issue]["upt_codes"] = Json::array(); }),
             mutate([&](Json& j) { j[issue]["upt_codes"] = Json::array({"b1"}); }),
             mutate([&](Json& j) { j[issue].erase("fix"); }),
             mutate([&](Json& j) { j[issue]["extra"] = 1; }),
             mutate([&](Json& j) { j[issue]["type"] = ""; }),
             mutate([&](Json& j) { j["steps"][0]["step"] = 2; }),
             mutate([&](Json& j) { j["version"] = "2.0"; }),
         }) {
        EXPECT_THROW(annotate::parse_issue_report(bad, 2), ValidationError) << bad;
    }
    EXPECT_TRUE(annotate::is_upt_code("E4"));
    EXPECT_FALSE(annotate::is_upt_code("E5"));
}

TEST(Issues, DetectRePromptsThenFails) {
    auto trace = testkit::make_trace("r1", "p1", "g", 2);
    auto gw = testkit::scripted_gateway({{"[issues r1]", "{\"steps\": []}"}, {"rejected", kReport}});
    auto report = annotate::detect_issues(trace, *gw);
    EXPECT_EQ(report.steps.size(), 2u);
    EXPECT_EQ(gw->transcript().size(), 2u);

    auto failing = testkit::scripted_gateway({{"*", "nope"}, {"*", "still nope"}});
    EXPECT_THROW(annotate::detect_issues(trace, *failing), AnnotationError);
}

TEST(Pipeline, FlagsIncompleteRunsAndPersistsFiles) {
    testkit::TempDir dir;
    auto done = testkit::make_trace("r1", "p1", "g", 2);
    auto aborted = testkit::make_trace("r2", "p1", "g", 1);
    aborted.terminal.completed = false;
    auto gw = testkit::scripted_gateway({{"[tagging r1]", "[[\"a\"],[\"b\"]]"}, {"[issues r1]", kReport}});
    auto a = annotate::annotate_experiment(dir.path(), {done, aborted}, *gw, {});
    EXPECT_EQ(a.tags.count("r1"), 1u);
    EXPECT_EQ(a.tags.count("r2"), 0u);
    ASSERT_EQ(a.flags.count("r2"), 1u);
    EXPECT_TRUE(annotate::has_annotations(dir.path()));
    auto loaded = annotate::load_annotations(dir.path());
    EXPECT_EQ(loaded.tags, a.tags);
    EXPECT_EQ(loaded.issues, a.issues);
    EXPECT_EQ(loaded.flags, a.flags);
    EXPECT_EQ(loaded.best_round, 1u);

    testkit::TempDir empty;
    EXPECT_THROW(annotate::load_annotations(empty.path()), DependencyError);
}
