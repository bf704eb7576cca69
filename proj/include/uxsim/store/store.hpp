// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uxsim/agent/agent.hpp"
#include "uxsim/analyze/analyze.hpp"
#include "uxsim/annotate/annotate.hpp"
#include "uxsim/persona/persona.hpp"

namespace uxsim::store {

// Ordered; a record only moves forward.
enum class ExperimentStatus { created, running, complete, annotated };
std::string_view to_string(ExperimentStatus s);
ExperimentStatus status_from_string(std::string_view s);

struct ExperimentRecord {
    std::string id;
    persona::ExperimentConfig config;
    std::string created_at;
    std::vector<std::string> run_ids;  // append-only
    ExperimentStatus status = ExperimentStatus::created;
    std::string error;  // last pipeline failure, if any
};

Json to_json(const ExperimentRecord& r);
ExperimentRecord record_from_json(const Json& j);

// Live sites get a browser session per run; snapshot directories get an
// offline environment. The browser endpoint comes from UXSIM_CDP_HOST and
// UXSIM_CDP_PORT.
agent::EnvironmentFactory environment_factory(const persona::ExperimentConfig& config);

// Layout: <root>/experiments/<id>/{manifest.json, runs/, blobs/,
// annotations/, edits/}.
class Store {
public:
    explicit Store(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path experiment_dir(const std::string& id) const;

    // Validates the config. Without an id one is derived from the site name.
    // Throws ConflictError when the id is taken.
    ExperimentRecord create(const persona::ExperimentConfig& config, const std::string& id = {});
    ExperimentRecord record(const std::string& id) const;  // NotFoundError
    std::vector<ExperimentRecord> list() const;
    // Rejects status regressions and run-id rewrites with ConflictError.
    void save(const ExperimentRecord& record);

    // Traces of every persisted run plus annotations when present.
    analyze::Experiment load(const std::string& id) const;

    // Experiment whose blob store holds `ref`.
    std::optional<std::string> find_snapshot(const std::string& ref) const;
    // Experiment whose edits/ holds the session.
    std::optional<std::string> find_edit_session(const std::string& session_id) const;

    // created -> running: records the planned run ids and returns them.
    // Throws ConflictError unless the experiment is freshly created.
    ExperimentRecord begin_run(const std::string& id);
    // running -> complete: executes every planned run.
    std::vector<agent::RunOutcome> execute_run(const std::string& id, llm::Gateway& gateway,
                                               const agent::EnvironmentFactory& make_env, int pool,
                                               env::EventBus* bus = nullptr);
    // begin_run then execute_run.
    std::vector<agent::RunOutcome> run(const std::string& id, llm::Gateway& gateway,
                                       const agent::EnvironmentFactory& make_env, int pool,
                                       env::EventBus* bus = nullptr);

    // complete|annotated -> annotated. ConflictError while running,
    // DependencyError before any run.
    annotate::Annotations annotate(const std::string& id, llm::Gateway& gateway,
                                   const annotate::AnnotationOptions& options);

    // Serializes writers of one experiment.
    std::mutex& writer_lock(const std::string& id);

private:
    std::filesystem::path root_;
    mutable std::mutex mu_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

bool valid_experiment_id(std::string_view id);

}  // namespace uxsim::store
