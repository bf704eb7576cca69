// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uxsim/env/environment.hpp"
#include "uxsim/env/events.hpp"
#include "uxsim/llm/gateway.hpp"
#include "uxsim/persona/persona.hpp"

namespace uxsim::agent {

inline constexpr std::string_view kReasonDone = "done";
inline constexpr std::string_view kReasonStepCap = "step cap";
inline constexpr std::string_view kReasonParseFailure = "decision parse failure";

struct Decision {
    std::string intent;
    std::string reasoning;
    env::AgentAction action;
};

// Reads the first fenced JSON block (or a bare JSON object) holding
// {intent, reasoning, action{kind, target_index?, payload?, success?}}.
// Throws ParseError naming the problem.
Decision parse_decision(std::string_view text);

struct Terminal {
    bool completed = false;
    std::optional<bool> success;
    std::string reason;

    bool operator==(const Terminal&) const = default;
};

struct Trace {
    std::string run_id;
    std::string persona_id;
    std::string goal_id;
    std::vector<env::StepEvent> steps;
    Terminal terminal;
};

std::string run_id_for(const persona::Persona& p, const persona::Goal& g);

// Run summary without the step bodies (which live in events.ndjson).
Json summary_json(const Trace& t);
Terminal terminal_from_json(const Json& j);

struct HistoryEntry {
    int step = 0;
    std::string intent;
    std::string action;
    std::string result;
};

std::string render_task_prompt(const persona::ExperimentConfig& config);
std::string render_behavior_prompt(const persona::Persona& persona);
std::string render_history(const std::vector<HistoryEntry>& history, std::size_t window);

// System messages carry the task and behavior prompts; the user message
// carries the session marker, goal, history window and page state.
std::vector<llm::ChatMessage> compose_messages(const persona::ExperimentConfig& config, const persona::Persona& persona,
                                               const persona::Goal& goal, const std::string& run_id, int step,
                                               const std::vector<HistoryEntry>& history, const env::PageState& state);

// Appended after an unparseable reply.
std::string format_reminder(const std::string& run_id, int step, const std::string& problem);

// Page the session starts on: the site url for live sites, "/" + start for
// snapshot directories.
std::string start_url(const persona::SiteRef& site);

// Perception-decision-action loop for one (persona, goal) pair. Stops on a
// done action, after max_steps, or after a second unparseable decision.
// Environment and storage failures propagate.
Trace run_simulation(const persona::ExperimentConfig& config, const persona::Persona& persona,
                     const persona::Goal& goal, env::Environment& environment, llm::Gateway& gateway,
                     env::SnapshotEmitter& emitter);

struct RunPlan {
    persona::Persona persona;
    persona::Goal goal;
    std::string run_id;
};

// Every persona attempts every goal, persona-major.
std::vector<RunPlan> plan_runs(const persona::ExperimentConfig& config, const std::vector<persona::Persona>& personas);

struct RunOutcome {
    RunPlan plan;
    Trace trace;
    std::optional<std::string> failure;  // set when the run aborted
};

using EnvironmentFactory = std::function<std::unique_ptr<env::Environment>()>;

// Runs all plans on `pool` worker threads, persisting each run under
// <experiment_dir>/runs/<run_id>/ and HTML under <experiment_dir>/blobs/.
// Outcomes come back in plan order.
std::vector<RunOutcome> run_experiment(const persona::ExperimentConfig& config, const std::vector<RunPlan>& plans,
                                       const EnvironmentFactory& make_env, llm::Gateway& gateway,
                                       const std::filesystem::path& experiment_dir, int pool,
                                       env::EventBus* bus = nullptr);

// Loads runs/<run_id>/events.ndjson and trace.json back into a Trace.
Trace load_trace(const std::filesystem::path& experiment_dir, const std::string& run_id);

}  // namespace uxsim::agent
