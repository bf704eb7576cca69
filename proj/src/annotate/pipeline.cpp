// SPDX-License-Identifier: Apache-2.0

#include "uxsim/annotate/annotate.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/common/parallel.hpp"

namespace uxsim::annotate {

namespace {

std::filesystem::path annotations_dir(const std::filesystem::path& experiment_dir) {
    return experiment_dir / "annotations";
}

}  // namespace

Json tags_json(const Annotations& a, int n_tags) {
    Json history = Json::array();
    for (std::size_t i = 0; i < a.score_history.size(); ++i) {
        const auto& s = a.score_history[i];
        history.push_back({{"round", i + 1}, {"intra", s.intra}, {"inter", s.inter}, {"score", s.score}});
    }
    Json runs = Json::object();
    for (const auto& [id, tags] : a.tags) runs[id] = tags;
    Json j;
    j["version"] = "1.0";
    j["n_tags"] = n_tags;
    j["best_round"] = a.best_round;
    j["score_history"] = history;
    j["runs"] = runs;
    return j;
}

Json issues_json(const Annotations& a) {
    Json runs = Json::object();
    for (const auto& [id, report] : a.issues) runs[id] = to_json(report);
    Json j;
    j["version"] = "1.0";
    j["runs"] = runs;
    return j;
}

Json flags_json(const Annotations& a) {
    Json runs = Json::object();
    for (const auto& [id, problems] : a.flags) runs[id] = problems;
    Json j;
    j["version"] = "1.0";
    j["runs"] = runs;
    return j;
}

Annotations annotate_experiment(const std::filesystem::path& experiment_dir, const std::vector<agent::Trace>& traces,
                                llm::Gateway& gateway, const AnnotationOptions& options) {
    Annotations out;
    std::vector<agent::Trace> eligible;
    for (const auto& t : traces) {
        if (!t.terminal.completed) out.flags[t.run_id].push_back("run did not complete; not annotated");
        else if (t.steps.empty()) out.flags[t.run_id].push_back("run has no steps; not annotated");
        else eligible.push_back(t);
    }

    auto refined = refine_tagging(eligible, gateway, options.n_tags, options.rounds, options.threshold, options.pool);
    out.tags = std::move(refined.tags);
    out.score_history = std::move(refined.history);
    out.best_round = refined.best_round;
    for (const auto& [id, err] : refined.failures) out.flags[id].push_back(err);

    std::vector<std::optional<IssueReport>> reports(eligible.size());
    std::vector<std::string> errors(eligible.size());
    parallel_for(eligible.size(), options.pool, [&](std::size_t i) {
        try {
            reports[i] = detect_issues(eligible[i], gateway);
        } catch (const AnnotationError& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < eligible.size(); ++i) {
        if (reports[i]) out.issues[eligible[i].run_id] = std::move(*reports[i]);
        else out.flags[eligible[i].run_id].push_back(errors[i]);
    }

    auto dir = annotations_dir(experiment_dir);
    fs::write_file_atomic(dir / "tags.json", dump_json(tags_json(out, options.n_tags)) + "\n");
    fs::write_file_atomic(dir / "issues.json", dump_json(issues_json(out)) + "\n");
    fs::write_file_atomic(dir / "flags.json", dump_json(flags_json(out)) + "\n");
    return out;
}

bool has_annotations(const std::filesystem::path& experiment_dir) {
    return std::filesystem::exists(annotations_dir(experiment_dir) / "issues.json");
}

Annotations load_annotations(const std::filesystem::path& experiment_dir) {
    auto dir = annotations_dir(experiment_dir);
    if (!has_annotations(experiment_dir)) throw DependencyError("experiment has no annotations; run annotate first");
    Annotations a;
    auto issues = parse_json(fs::read_file(dir / "issues.json"), "issues.json");
    const auto issue_runs = issues.value("runs", Json::object());
    for (const auto& [id, report] : issue_runs.items()) {
        a.issues[id] = issue_report_from_json(report, id);
    }
    if (std::filesystem::exists(dir / "tags.json")) {
        auto tags = parse_json(fs::read_file(dir / "tags.json"), "tags.json");
        const auto tag_runs = tags.value("runs", Json::object());
        for (const auto& [id, arr] : tag_runs.items()) {
            a.tags[id] = arr.get<TraceTags>();
        }
        for (const auto& h : tags.value("score_history", Json::array())) {
            a.score_history.push_back({h.value("intra", 0.0), h.value("inter", 0.0), h.value("score", 0.0)});
        }
        a.best_round = tags.value("best_round", std::size_t{0});
    }
    if (std::filesystem::exists(dir / "flags.json")) {
        auto flags = parse_json(fs::read_file(dir / "flags.json"), "flags.json");
        const auto flag_runs = flags.value("runs", Json::object());
        for (const auto& [id, arr] : flag_runs.items()) {
            a.flags[id] = arr.get<std::vector<std::string>>();
        }
    }
    return a;
}

}  // namespace uxsim::annotate
