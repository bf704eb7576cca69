// SPDX-License-Identifier: Apache-2.0

#include "uxsim/store/store.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cstdio>

#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/common/text.hpp"
#include "uxsim/env/cdp.hpp"
#include "uxsim/env/events.hpp"

namespace uxsim::store {

namespace {

constexpr std::array<std::string_view, 4> kStatusNames = {"created", "running", "complete", "annotated"};

std::filesystem::path manifest_path(const std::filesystem::path& dir) { return dir / "manifest.json"; }

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

}  // namespace

std::string_view to_string(ExperimentStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }

ExperimentStatus status_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kStatusNames.size(); ++i) {
        if (kStatusNames[i] == s) return static_cast<ExperimentStatus>(i);
    }
    throw ValidationError("unknown experiment status '" + std::string(s) + "'");
}

bool valid_experiment_id(std::string_view id) {
    if (id.empty() || id.size() > 96) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
               c == '-' || c == '_';
    });
}

Json to_json(const ExperimentRecord& r) {
    Json j;
    j["version"] = "1.0";
    j["id"] = r.id;
    j["status"] = to_string(r.status);
    j["created_at"] = r.created_at;
    j["run_ids"] = r.run_ids;
    if (!r.error.empty()) j["error"] = r.error;
    j["config"] = persona::to_json(r.config);
    return j;
}

ExperimentRecord record_from_json(const Json& j) {
    ExperimentRecord r;
    r.id = require_string(j, "id", "manifest");
    r.status = status_from_string(require_string(j, "status", "manifest"));
    r.created_at = j.value("created_at", std::string());
    r.run_ids = j.value("run_ids", std::vector<std::string>{});
    r.error = j.value("error", std::string());
    r.config = persona::config_from_json(require_field(j, "config", "manifest"));
    return r;
}

agent::EnvironmentFactory environment_factory(const persona::ExperimentConfig& config) {
    if (!config.site.is_live()) {
        std::filesystem::path dir = config.site.url;
        return [dir] { return std::make_unique<env::OfflineEnvironment>(dir); };
    }
    env::CdpOptions options;
    options.endpoint.host = env_or("UXSIM_CDP_HOST", options.endpoint.host);
    options.endpoint.port = std::stoi(env_or("UXSIM_CDP_PORT", std::to_string(options.endpoint.port)));
    options.site_origin = env::url_origin(config.site.url);
    options.capture_screenshots = env_or("UXSIM_SCREENSHOTS", "0") == "1";
    return [options] { return std::make_unique<env::CdpEnvironment>(options); };
}

Store::Store(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_ / "experiments");
}

std::filesystem::path Store::experiment_dir(const std::string& id) const {
    if (!valid_experiment_id(id)) throw NotFoundError("unknown experiment '" + id + "'");
    return root_ / "experiments" / id;
}

std::mutex& Store::writer_lock(const std::string& id) {
    std::lock_guard lock(mu_);
    auto& m = locks_[id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
}

ExperimentRecord Store::create(const persona::ExperimentConfig& config, const std::string& requested_id) {
    persona::validate(config);
    std::lock_guard lock(mu_);
    std::string id = requested_id;
    if (id.empty()) {
        auto base = text::slugify(config.site.name.empty() ? "experiment" : config.site.name);
        for (int n = 1;; ++n) {
            char suffix[16];
            std::snprintf(suffix, sizeof suffix, "-%03d", n);
            id = base + suffix;
            if (!std::filesystem::exists(root_ / "experiments" / id)) break;
        }
    }
    if (!valid_experiment_id(id)) throw ValidationError("experiment id must match [a-z0-9_-]+, got '" + id + "'");
    auto dir = root_ / "experiments" / id;
    if (std::filesystem::exists(manifest_path(dir))) throw ConflictError("experiment '" + id + "' already exists");
    ExperimentRecord r;
    r.id = id;
    r.config = config;
    r.created_at = env::utc_timestamp();
    fs::write_file_atomic(manifest_path(dir), dump_json(to_json(r)) + "\n");
    return r;
}

ExperimentRecord Store::record(const std::string& id) const {
    auto path = manifest_path(experiment_dir(id));
    if (!std::filesystem::exists(path)) throw NotFoundError("unknown experiment '" + id + "'");
    return record_from_json(parse_json(fs::read_file(path), "manifest.json"));
}

std::vector<ExperimentRecord> Store::list() const {
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(root_ / "experiments")) {
        if (std::filesystem::exists(manifest_path(entry.path()))) ids.push_back(entry.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    std::vector<ExperimentRecord> out;
    for (const auto& id : ids) out.push_back(record(id));
    return out;
}

void Store::save(const ExperimentRecord& r) {
    auto current = record(r.id);
    if (r.status < current.status) {
        throw ConflictError("experiment '" + r.id + "' cannot move from " + std::string(to_string(current.status)) +
                            " back to " + std::string(to_string(r.status)));
    }
    if (r.run_ids.size() < current.run_ids.size() ||
        !std::equal(current.run_ids.begin(), current.run_ids.end(), r.run_ids.begin())) {
        throw ConflictError("experiment '" + r.id + "' run ids are append-only");
    }
    fs::write_file_atomic(manifest_path(experiment_dir(r.id)), dump_json(to_json(r)) + "\n");
}

analyze::Experiment Store::load(const std::string& id) const {
    auto r = record(id);
    auto dir = experiment_dir(id);
    analyze::Experiment exp;
    exp.id = r.id;
    exp.config = r.config;
    exp.personas = persona::expand_traits(r.config);
    for (const auto& run_id : r.run_ids) {
        if (std::filesystem::exists(dir / "runs" / run_id / "trace.json")) {
            exp.traces.push_back(agent::load_trace(dir, run_id));
        }
    }
    std::sort(exp.traces.begin(), exp.traces.end(),
              [](const agent::Trace& a, const agent::Trace& b) { return a.run_id < b.run_id; });
    if (annotate::has_annotations(dir)) exp.annotations = annotate::load_annotations(dir);
    return exp;
}

std::optional<std::string> Store::find_snapshot(const std::string& ref) const {
    bool hex = ref.size() == 64 && std::all_of(ref.begin(), ref.end(), [](char c) {
                   return std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'f');
               });
    if (!hex) return std::nullopt;
    for (const auto& r : list()) {
        if (std::filesystem::exists(experiment_dir(r.id) / "blobs" / (ref + ".html"))) return r.id;
    }
    return std::nullopt;
}

std::optional<std::string> Store::find_edit_session(const std::string& session_id) const {
    bool safe = !session_id.empty() && std::all_of(session_id.begin(), session_id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    });
    if (!safe) return std::nullopt;
    for (const auto& r : list()) {
        if (std::filesystem::exists(experiment_dir(r.id) / "edits" / (session_id + ".json"))) return r.id;
    }
    return std::nullopt;
}

ExperimentRecord Store::begin_run(const std::string& id) {
    std::lock_guard lock(writer_lock(id));
    auto r = record(id);
    if (r.status != ExperimentStatus::created) {
        throw ConflictError("experiment '" + id + "' is " + std::string(to_string(r.status)) + "; it can run once");
    }
    auto personas = persona::expand_traits(r.config);
    for (const auto& plan : agent::plan_runs(r.config, personas)) r.run_ids.push_back(plan.run_id);
    r.status = ExperimentStatus::running;
    save(r);
    return r;
}

std::vector<agent::RunOutcome> Store::execute_run(const std::string& id, llm::Gateway& gateway,
                                                  const agent::EnvironmentFactory& make_env, int pool,
                                                  env::EventBus* bus) {
    auto r = record(id);
    if (r.status != ExperimentStatus::running) throw ConflictError("experiment '" + id + "' is not running");
    auto personas = persona::expand_traits(r.config);
    std::vector<agent::RunOutcome> outcomes;
    try {
        outcomes = agent::run_experiment(r.config, agent::plan_runs(r.config, personas), make_env, gateway,
                                         experiment_dir(id), pool, bus);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    std::lock_guard lock(writer_lock(id));
    for (const auto& o : outcomes) {
        if (o.failure) r.error = o.plan.run_id + ": " + *o.failure;
    }
    r.status = ExperimentStatus::complete;
    save(r);
    return outcomes;
}

std::vector<agent::RunOutcome> Store::run(const std::string& id, llm::Gateway& gateway,
                                          const agent::EnvironmentFactory& make_env, int pool, env::EventBus* bus) {
    begin_run(id);
    return execute_run(id, gateway, make_env, pool, bus);
}

annotate::Annotations Store::annotate(const std::string& id, llm::Gateway& gateway,
                                      const annotate::AnnotationOptions& options) {
    std::lock_guard lock(writer_lock(id));
    auto r = record(id);
    if (r.status == ExperimentStatus::running) throw ConflictError("experiment '" + id + "' is still running");
    if (r.status == ExperimentStatus::created) throw DependencyError("experiment '" + id + "' has not run yet");
    auto exp = load(id);
    auto opts = options;
    opts.n_tags = r.config.n_tags;
    auto annotations = annotate::annotate_experiment(experiment_dir(id), exp.traces, gateway, opts);
    r.status = ExperimentStatus::annotated;
    save(r);
    return annotations;
}

}  // namespace uxsim::store
