// SPDX-License-Identifier: Apache-2.0

#include "uxsim/agent/agent.hpp"

#include <set>

#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/common/parallel.hpp"
#include "uxsim/common/text.hpp"
#include "uxsim/prompts/templates.hpp"

namespace uxsim::agent {

namespace {

constexpr std::string_view kDecisionFormat =
    "Think aloud as your persona, then end your reply with exactly one fenced JSON block:\n"
    "```json\n"
    "{\"intent\": \"<your current micro-goal>\", \"reasoning\": \"<first-person think-aloud>\", "
    "\"action\": {\"kind\": \"click|type|scroll|navigate|go_back|done\", \"target_index\": <element index>, "
    "\"payload\": \"<text to type, url, or pixel delta>\", \"success\": <true|false, only with done>}}\n"
    "```\n"
    "Use target_index for click and type. Use done when you have achieved the goal or given up.";

}  // namespace

Decision parse_decision(std::string_view text_in) {
    std::string body;
    if (auto fenced = text::extract_fenced_block(text_in)) {
        body = *fenced;
    } else {
        auto open = text_in.find('{');
        auto close = text_in.rfind('}');
        if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
            throw ParseError("no decision block found");
        }
        body = std::string(text_in.substr(open, close - open + 1));
    }
    auto j = parse_json(body, "decision");
    if (!j.is_object()) throw ParseError("decision block must be a JSON object");
    if (!j.contains("action")) throw ParseError("decision is missing 'action'");
    Decision d;
    try {
        d.action = env::action_from_json(j.at("action"));
        if (j.contains("intent") && !j.at("intent").is_null()) d.intent = j.at("intent").get<std::string>();
        if (j.contains("reasoning") && !j.at("reasoning").is_null()) d.reasoning = j.at("reasoning").get<std::string>();
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    } catch (const nlohmann::json::exception&) {
        throw ParseError("decision fields 'intent' and 'reasoning' must be strings");
    }
    return d;
}

std::string run_id_for(const persona::Persona& p, const persona::Goal& g) { return p.id + "--" + g.id; }

Json summary_json(const Trace& t) {
    Json j;
    j["version"] = "1.0";
    j["run_id"] = t.run_id;
    j["persona_id"] = t.persona_id;
    j["goal_id"] = t.goal_id;
    j["steps"] = t.steps.size();
    Json term;
    term["completed"] = t.terminal.completed;
    term["success"] = t.terminal.success ? Json(*t.terminal.success) : Json(nullptr);
    term["reason"] = t.terminal.reason;
    j["terminal"] = term;
    return j;
}

Terminal terminal_from_json(const Json& j) {
    Terminal t;
    t.completed = j.value("completed", false);
    if (j.contains("success") && j.at("success").is_boolean()) t.success = j.at("success").get<bool>();
    t.reason = j.value("reason", "");
    return t;
}

std::string render_task_prompt(const persona::ExperimentConfig& config) {
    std::string bullets;
    for (const auto& g : config.goals) bullets += "\n- " + g.text;
    if (auto d = text::trim(config.directives); !d.empty()) bullets += "\n- " + d;
    auto site_url = config.site.is_live() ? config.site.url : std::string("/");
    return text::substitute(prompts::kTaskPrompt,
                            {{"site_name", config.site.name}, {"site_url", site_url}, {"focus_bullets", bullets}});
}

std::string render_behavior_prompt(const persona::Persona& p) {
    return text::substitute(prompts::kBehaviorPrompt, {{"persona", persona::render_persona_prompt(p)}});
}

std::string render_history(const std::vector<HistoryEntry>& history, std::size_t window) {
    if (history.empty()) return "(no previous steps)\n";
    std::string out;
    std::size_t first = history.size() > window ? history.size() - window : 0;
    if (first > 0) {
        std::set<std::string> seen;
        std::string intents;
        for (std::size_t i = 0; i < first; ++i) {
            if (seen.insert(history[i].intent).second && !history[i].intent.empty()) {
                intents += (intents.empty() ? "" : "; ") + history[i].intent;
            }
        }
        out += "Summary of steps 1-" + std::to_string(history[first - 1].step) + ": " +
               (intents.empty() ? "no stated intents" : "intents were " + text::truncate(intents, 400)) + "\n";
    }
    for (std::size_t i = first; i < history.size(); ++i) {
        const auto& h = history[i];
        out += "- step " + std::to_string(h.step) + ": intent: " + h.intent + "; action: " + h.action +
               "; result: " + h.result + "\n";
    }
    return out;
}

std::vector<llm::ChatMessage> compose_messages(const persona::ExperimentConfig& config, const persona::Persona& p,
                                               const persona::Goal& goal, const std::string& run_id, int step,
                                               const std::vector<HistoryEntry>& history, const env::PageState& state) {
    std::string user;
    user += "[session " + run_id + "] Step " + std::to_string(step) + " of at most " +
            std::to_string(config.max_steps) + "\n";
    user += "Goal (" + goal.id + "): " + goal.text + "\n\n";
    user += "History:\n" + render_history(history, static_cast<std::size_t>(config.history_window)) + "\n";
    user += std::string(env::kStateBegin) + env::serialize_page_state(state) + std::string(env::kStateEnd) + "\n\n";
    user += std::string(kDecisionFormat);
    return {
        {llm::Role::system, render_task_prompt(config)},
        {llm::Role::system, render_behavior_prompt(p)},
        {llm::Role::user, std::move(user)},
    };
}

std::string format_reminder(const std::string& run_id, int step, const std::string& problem) {
    return "[session " + run_id + "] Step " + std::to_string(step) + " format reminder: your previous reply could not " +
           "be used (" + problem + "). Reply again and end with exactly one fenced JSON block:\n" +
           std::string(kDecisionFormat);
}

std::string start_url(const persona::SiteRef& site) {
    if (site.is_live()) return site.url;
    return "/" + site.start;
}

Trace run_simulation(const persona::ExperimentConfig& config, const persona::Persona& p, const persona::Goal& goal,
                     env::Environment& environment, llm::Gateway& gateway, env::SnapshotEmitter& emitter) {
    Trace trace;
    trace.run_id = run_id_for(p, goal);
    trace.persona_id = p.id;
    trace.goal_id = goal.id;
    environment.open(start_url(config.site));

    std::vector<HistoryEntry> history;
    for (int step = 1; step <= config.max_steps; ++step) {
        auto state = environment.observe();
        auto html = environment.current_html();
        auto shot = environment.screenshot();
        auto messages = compose_messages(config, p, goal, trace.run_id, step, history, state);

        env::StepEvent ev;
        ev.run_id = trace.run_id;
        ev.step = step;
        ev.url = state.url;
        ev.tabs = state.tabs;
        ev.page_state = state;

        Decision decision;
        if (environment.off_site()) {
            decision.intent = "return to " + config.site.name;
            decision.reasoning = "This page is outside " + config.site.name +
                                 ", so I go back to the last page I was on and continue there.";
            decision.action = {env::ActionKind::go_back, std::nullopt, std::nullopt, std::nullopt};
            ev.prompt_text = llm::render_prompt(messages);
        } else {
            auto reply = gateway.complete(gateway.make_request(llm::Purpose::simulation, messages, trace.run_id));
            try {
                decision = parse_decision(reply.text);
                ev.prompt_text = llm::render_prompt(messages);
            } catch (const ParseError& first) {
                messages.push_back({llm::Role::assistant, reply.text});
                messages.push_back({llm::Role::user, format_reminder(trace.run_id, step, first.what())});
                ev.prompt_text = llm::render_prompt(messages);
                auto retry = gateway.complete(gateway.make_request(llm::Purpose::simulation, messages, trace.run_id));
                try {
                    decision = parse_decision(retry.text);
                } catch (const ParseError& second) {
                    ev.action = {env::ActionKind::done, std::nullopt, std::nullopt, false};
                    ev.reasoning = retry.text;
                    ev.result = std::string(kReasonParseFailure);
                    ev.error = second.what();
                    trace.steps.push_back(emitter.emit(std::move(ev), html, shot));
                    trace.terminal = {true, false, std::string(kReasonParseFailure)};
                    return trace;
                }
            }
        }

        ev.action = decision.action;
        ev.intent = decision.intent;
        ev.reasoning = decision.reasoning;
        try {
            ev.result = environment.execute(decision.action);
        } catch (const ActionError& e) {
            ev.error = e.what();
            ev.result = std::string("action failed: ") + e.what();
        }
        history.push_back({step, ev.intent, env::describe(ev.action), ev.result});
        trace.steps.push_back(emitter.emit(std::move(ev), html, shot));

        if (decision.action.kind == env::ActionKind::done) {
            trace.terminal = {true, decision.action.success, std::string(kReasonDone)};
            return trace;
        }
    }
    trace.terminal = {true, std::nullopt, std::string(kReasonStepCap)};
    return trace;
}

std::vector<RunPlan> plan_runs(const persona::ExperimentConfig& config, const std::vector<persona::Persona>& personas) {
    std::vector<RunPlan> plans;
    for (const auto& p : personas) {
        for (const auto& g : config.goals) plans.push_back({p, g, run_id_for(p, g)});
    }
    return plans;
}

std::vector<RunOutcome> run_experiment(const persona::ExperimentConfig& config, const std::vector<RunPlan>& plans,
                                       const EnvironmentFactory& make_env, llm::Gateway& gateway,
                                       const std::filesystem::path& experiment_dir, int pool, env::EventBus* bus) {
    env::BlobStore blobs(experiment_dir / "blobs");
    std::vector<RunOutcome> outcomes(plans.size());
    parallel_for(plans.size(), pool, [&](std::size_t i) {
        const auto& plan = plans[i];
        auto& out = outcomes[i];
        out.plan = plan;
        auto run_dir = experiment_dir / "runs" / plan.run_id;
        std::filesystem::create_directories(run_dir);
        auto log_path = run_dir / "events.ndjson";
        std::filesystem::remove(log_path);
        env::EventLog log(log_path);
        env::SnapshotEmitter emitter(blobs, log, bus);
        try {
            auto environment = make_env();
            out.trace = run_simulation(config, plan.persona, plan.goal, *environment, gateway, emitter);
        } catch (const std::exception& e) {
            out.failure = e.what();
            out.trace.run_id = plan.run_id;
            out.trace.persona_id = plan.persona.id;
            out.trace.goal_id = plan.goal.id;
            if (std::filesystem::exists(log_path)) out.trace.steps = log.read_all();
            out.trace.terminal = {false, std::nullopt, std::string("aborted: ") + e.what()};
        }
        auto summary = summary_json(out.trace);
        if (out.failure) summary["failure"] = *out.failure;
        fs::write_file_atomic(run_dir / "trace.json", dump_json(summary) + "\n");
    });
    return outcomes;
}

Trace load_trace(const std::filesystem::path& experiment_dir, const std::string& run_id) {
    auto run_dir = experiment_dir / "runs" / run_id;
    if (!std::filesystem::exists(run_dir / "trace.json")) throw NotFoundError("run " + run_id + " not found");
    auto summary = parse_json(fs::read_file(run_dir / "trace.json"), "trace.json");
    Trace t;
    t.run_id = require_string(summary, "run_id", "trace.json");
    t.persona_id = require_string(summary, "persona_id", "trace.json");
    t.goal_id = require_string(summary, "goal_id", "trace.json");
    t.terminal = terminal_from_json(summary.value("terminal", Json::object()));
    t.steps = env::EventLog::read(run_dir / "events.ndjson");
    return t;
}

}  // namespace uxsim::agent
