// SPDX-License-Identifier: Apache-2.0

#include "uxsim/store/server.hpp"

#include <httplib.h>

#include "uxsim/analyze/analyze.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/patch/patch.hpp"
#include "uxsim/refine/refine.hpp"

namespace uxsim::store {

namespace {

using httplib::Request;
using httplib::Response;
using Handler = std::function<Json(const Request&, Response&)>;

template <typename T>
bool is(const std::exception& e) {
    return dynamic_cast<const T*>(&e) != nullptr;
}

Json error_body(int status, const std::string& message) {
    return {{"version", "1.0"}, {"error", {{"status", status}, {"message", message}}}};
}

httplib::Server::Handler wrap(Handler h) {
    return [h = std::move(h)](const Request& req, Response& res) {
        try {
            auto body = h(req, res);
            if (!body.is_null()) res.set_content(dump_json(body) + "\n", "application/json");
        } catch (const std::exception& e) {
            res.status = status_for(e);
            res.set_content(dump_json(error_body(res.status, e.what())) + "\n", "application/json");
        }
    };
}

Json body_json(const Request& req) {
    if (req.body.empty()) return Json::object();
    auto j = parse_json(req.body, "request body");
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
}

std::string param(const Request& req, const std::string& name) {
    auto it = req.path_params.find(name);
    return it == req.path_params.end() ? std::string() : it->second;
}

std::optional<std::string> query(const Request& req, const std::string& name) {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
}

void require_idle(const ExperimentRecord& r) {
    if (r.status == ExperimentStatus::running) throw ConflictError("experiment '" + r.id + "' is running");
}

// Issue ids start with their experiment id, which never contains a dot.
std::string experiment_of_issue(const std::string& issue_id) {
    auto dot = issue_id.find('.');
    if (dot == std::string::npos || !valid_experiment_id(issue_id.substr(0, dot))) {
        throw NotFoundError("unknown issue '" + issue_id + "'");
    }
    return issue_id.substr(0, dot);
}

Json with_version(const char* key, Json value) {
    Json j;
    j["version"] = "1.0";
    j[key] = std::move(value);
    return j;
}

}  // namespace

int status_for(const std::exception& e) {
    if (is<NotFoundError>(e)) return 404;
    if (is<ConflictError>(e) || is<DependencyError>(e)) return 409;
    if (is<ValidationError>(e) || is<ParseError>(e) || is<QueryError>(e) || is<ConfigError>(e) ||
        is<SelectorError>(e) || is<PatchError>(e) || is<PreviewError>(e) || is<nlohmann::json::exception>(e)) {
        return 422;
    }
    if (is<ProviderError>(e) || is<EditError>(e) || is<AnnotationError>(e)) return 502;
    return 500;
}

Server::Server(Store& store, ServerOptions options)
    : store_(store), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
    routes();
}

Server::~Server() {
    stop();
    wait_for_jobs();
}

int Server::start(const std::string& host) {
    int port = http_->bind_to_any_port(host);
    if (port <= 0) throw StorageError("could not bind an HTTP port on " + host);
    listener_ = std::thread([this] { http_->listen_after_bind(); });
    http_->wait_until_ready();
    return port;
}

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }

void Server::stop() {
    http_->stop();
    if (listener_.joinable()) listener_.join();
}

void Server::wait_for_jobs() {
    std::vector<std::thread> jobs;
    {
        std::lock_guard lock(jobs_mu_);
        jobs.swap(jobs_);
    }
    for (auto& t : jobs) t.join();
}

void Server::spawn(std::function<void()> job) {
    std::lock_guard lock(jobs_mu_);
    jobs_.emplace_back(std::move(job));
}

void Server::routes() {
    auto& s = *http_;
    auto gateway_for = [this](const persona::ExperimentConfig& config) {
        if (!options_.make_gateway) throw ProviderError("no model provider is configured");
        return options_.make_gateway(config);
    };

    s.Get("/health", wrap([](const Request&, Response&) { return Json{{"version", "1.0"}, {"status", "ok"}}; }));

    s.Post("/experiments", wrap([this](const Request& req, Response& res) {
        auto body = body_json(req);
        const Json& config = body.contains("config") ? body.at("config") : body;
        auto r = store_.create(persona::config_from_json(config), body.value("id", std::string()));
        res.status = 201;
        return to_json(r);
    }));

    s.Get("/experiments", wrap([this](const Request&, Response&) {
        Json list = Json::array();
        for (const auto& r : store_.list()) {
            list.push_back({{"id", r.id},
                            {"status", to_string(r.status)},
                            {"created_at", r.created_at},
                            {"site", r.config.site.name},
                            {"runs", r.run_ids.size()}});
        }
        return with_version("experiments", list);
    }));

    s.Get("/experiments/:id", wrap([this](const Request& req, Response&) { return to_json(store_.record(param(req, "id"))); }));

    s.Post("/experiments/:id/run", wrap([this, gateway_for](const Request& req, Response& res) {
        auto id = param(req, "id");
        auto record = store_.record(id);
        // Reject a second run before building a gateway for it.
        if (record.status != ExperimentStatus::created) {
            throw ConflictError("experiment '" + id + "' has already run");
        }
        const auto& config = record.config;
        auto gateway = gateway_for(config);
        auto make_env = options_.make_environment(config);
        auto r = store_.begin_run(id);
        spawn([this, id, gateway, make_env] { store_.execute_run(id, *gateway, make_env, options_.pool); });
        res.status = 202;
        return to_json(r);
    }));

    s.Post("/experiments/:id/annotate", wrap([this, gateway_for](const Request& req, Response& res) {
        auto id = param(req, "id");
        auto r = store_.record(id);
        require_idle(r);
        if (r.status == ExperimentStatus::created) throw DependencyError("experiment '" + id + "' has not run yet");
        auto gateway = gateway_for(r.config);
        spawn([this, id, gateway] {
            try {
                store_.annotate(id, *gateway, options_.annotation);
            } catch (const std::exception& e) {
                std::lock_guard lock(store_.writer_lock(id));
                auto failed = store_.record(id);
                failed.error = std::string("annotation failed: ") + e.what();
                store_.save(failed);
            }
        });
        res.status = 202;
        return to_json(r);
    }));

    s.Get("/experiments/:id/goals", wrap([this](const Request& req, Response&) {
        auto exp = store_.load(param(req, "id"));
        return with_version("goals", analyze::to_json(analyze::goal_summary(exp)));
    }));

    s.Get("/experiments/:id/goals/:gid/traits", wrap([this](const Request& req, Response&) {
        auto exp = store_.load(param(req, "id"));
        auto mode = analyze::breakdown_mode_from_string(query(req, "mode").value_or("trait_centric"));
        return with_version("breakdown", analyze::to_json(analyze::trait_breakdown(exp, param(req, "gid"), mode)));
    }));

    s.Get("/experiments/:id/issues", wrap([this](const Request& req, Response&) {
        auto exp = store_.load(param(req, "id"));
        std::map<std::string, std::string> filter;
        for (const auto& [k, v] : req.params) filter[k] = v;
        return with_version("issues", analyze::to_json(analyze::issue_list(exp, filter)));
    }));

    s.Get("/experiments/:id/journey", wrap([this](const Request& req, Response&) {
        auto exp = store_.load(param(req, "id"));
        auto mode = analyze::journey_mode_from_string(query(req, "mode").value_or("page_level"));
        return with_version("journey", analyze::to_json(analyze::journey_graph(exp, mode)));
    }));

    s.Get("/experiments/:id/impacted", wrap([this](const Request& req, Response&) {
        auto id = param(req, "id");
        auto exp = store_.load(id);
        auto selector = query(req, "selector");
        auto goal = query(req, "goal");
        if (!selector || selector->empty()) throw QueryError("'selector' is required");
        if (!goal || goal->empty()) throw QueryError("'goal' is required");
        double threshold = exp.config.adjacency_threshold;
        if (auto t = query(req, "threshold")) {
            try {
                threshold = std::stod(*t);
            } catch (const std::exception&) {
                throw QueryError("'threshold' must be a number");
            }
        }
        env::BlobStore blobs(store_.experiment_dir(id) / "blobs");
        Json j;
        j["version"] = "1.0";
        j["goals"] = refine::adjacent_goals(exp, *goal, threshold);
        j["runs"] = refine::to_json(refine::impacted_personas(exp, blobs, *selector, *goal, threshold));
        return j;
    }));

    s.Get("/experiments/:id/report", wrap([this](const Request& req, Response&) {
        return analyze::report_json(store_.load(param(req, "id")));
    }));

    s.Get("/issues/:iid", wrap([this](const Request& req, Response&) {
        auto iid = param(req, "iid");
        auto exp = store_.load(experiment_of_issue(iid));
        return with_version("detail", analyze::issue_detail(exp, iid));
    }));

    s.Post("/issues/:iid/preview", wrap([this, gateway_for](const Request& req, Response&) {
        auto iid = param(req, "iid");
        auto exp_id = experiment_of_issue(iid);
        auto r = store_.record(exp_id);
        require_idle(r);
        auto exp = store_.load(exp_id);
        analyze::find_issue(analyze::all_issues(exp), iid);
        auto body = body_json(req);
        auto ref = require_string(body, "snapshot_ref", "preview request");
        env::BlobStore blobs(store_.experiment_dir(exp_id) / "blobs");
        if (!blobs.contains(ref)) throw NotFoundError("unknown snapshot '" + ref + "'");
        auto gateway = gateway_for(r.config);
        return refine::to_json(refine::preview_replay(exp, blobs, iid, ref, *gateway));
    }));

    s.Get("/snapshots/:ref", [this](const Request& req, Response& res) {
        try {
            auto ref = param(req, "ref");
            auto exp_id = store_.find_snapshot(ref);
            if (!exp_id) throw NotFoundError("unknown snapshot '" + ref + "'");
            env::BlobStore blobs(store_.experiment_dir(*exp_id) / "blobs");
            res.set_content(blobs.get(ref), "text/html; charset=utf-8");
        } catch (const std::exception& e) {
            res.status = status_for(e);
            res.set_content(dump_json(error_body(res.status, e.what())) + "\n", "application/json");
        }
    });

    // Shared by the two snapshot mutation routes: resolves the experiment,
    // opens or resumes the session and hands both to `act`.
    auto with_session = [this](const Request& req,
                               const std::function<Json(refine::EditStore&, refine::EditSession&,
                                                        const ExperimentRecord&, const Json&)>& act) {
        auto ref = param(req, "ref");
        auto exp_id = store_.find_snapshot(ref);
        if (!exp_id) throw NotFoundError("unknown snapshot '" + ref + "'");
        auto r = store_.record(*exp_id);
        require_idle(r);
        auto body = body_json(req);
        std::lock_guard lock(store_.writer_lock(*exp_id));
        auto dir = store_.experiment_dir(*exp_id);
        env::BlobStore blobs(dir / "blobs");
        refine::EditStore edits(blobs, dir / "edits");
        auto session = body.contains("session_id") ? edits.load(require_string(body, "session_id", "edit request"))
                                                   : edits.open(ref);
        if (session.current_ref() != ref) {
            throw ConflictError("snapshot " + ref + " is not the current snapshot of session " + session.session_id);
        }
        return act(edits, session, r, body);
    };

    s.Post("/snapshots/:ref/edit", wrap([with_session, gateway_for](const Request& req, Response&) {
        return with_session(req, [&](refine::EditStore& edits, refine::EditSession& session,
                                     const ExperimentRecord& r, const Json& body) {
            auto instruction = require_string(body, "instruction", "edit request");
            auto gateway = gateway_for(r.config);
            auto outcome = edits.edit(session, instruction, *gateway, body.value("target", std::string()));
            Json j;
            j["version"] = "1.0";
            j["outcome"] = refine::to_json(outcome);
            j["session"] = refine::to_json(session);
            return j;
        });
    }));

    s.Post("/snapshots/:ref/patches", wrap([with_session](const Request& req, Response&) {
        return with_session(req, [&](refine::EditStore& edits, refine::EditSession& session,
                                     const ExperimentRecord&, const Json& body) {
            const Json& raw = body.contains("patchset") ? body.at("patchset") : body;
            auto ps = patch::patchset_from_json(raw);
            auto outcome = edits.apply(session, body.value("instruction", std::string("(direct patchset)")), ps);
            Json j;
            j["version"] = "1.0";
            j["outcome"] = refine::to_json(outcome);
            j["session"] = refine::to_json(session);
            return j;
        });
    }));

    auto session_route = [this](const Request& req, const std::function<void(refine::EditStore&, refine::EditSession&)>& act) {
        auto sid = param(req, "sid");
        auto exp_id = store_.find_edit_session(sid);
        if (!exp_id) throw NotFoundError("unknown edit session '" + sid + "'");
        std::lock_guard lock(store_.writer_lock(*exp_id));
        auto dir = store_.experiment_dir(*exp_id);
        env::BlobStore blobs(dir / "blobs");
        refine::EditStore edits(blobs, dir / "edits");
        auto session = edits.load(sid);
        act(edits, session);
        return with_version("session", refine::to_json(session));
    };

    s.Get("/edit-sessions/:sid", wrap([session_route](const Request& req, Response&) {
        return session_route(req, [](refine::EditStore&, refine::EditSession&) {});
    }));

    s.Post("/edit-sessions/:sid/revert", wrap([session_route](const Request& req, Response&) {
        auto steps = body_json(req).value("steps", std::size_t{1});
        return session_route(req, [&](refine::EditStore& e, refine::EditSession& s) { e.revert(s, steps); });
    }));

    s.Post("/edit-sessions/:sid/redo", wrap([session_route](const Request& req, Response&) {
        auto steps = body_json(req).value("steps", std::size_t{1});
        return session_route(req, [&](refine::EditStore& e, refine::EditSession& s) { e.redo(s, steps); });
    }));
}

}  // namespace uxsim::store
