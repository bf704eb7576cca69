// SPDX-License-Identifier: Apache-2.0

// Command-line entry point: run, annotate, report, patch, preview, serve.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>

#include "uxsim/analyze/analyze.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/llm/openai_provider.hpp"
#include "uxsim/patch/patch.hpp"
#include "uxsim/refine/refine.hpp"
#include "uxsim/store/server.hpp"
#include "uxsim/store/store.hpp"

namespace {

using namespace uxsim;

struct ProviderArgs {
    std::string name = "openai";
    std::string script;

    std::shared_ptr<llm::Gateway> gateway(const persona::ExperimentConfig& config) const {
        std::optional<std::filesystem::path> path;
        if (!script.empty()) path = script;
        llm::GatewayOptions options;
        options.temperatures = llm::TemperaturePolicy::with_overrides(config.temperature_overrides);
        return std::make_shared<llm::Gateway>(llm::make_provider(name, path), options);
    }
};

void add_provider_flags(CLI::App* cmd, ProviderArgs& args) {
    cmd->add_option("--llm", args.name, "Model provider: openai, mock, mock-fn")->capture_default_str();
    cmd->add_option("--script", args.script, "Scripted transcript for --llm mock");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
        dynamic_cast<const QueryError*>(&e) || dynamic_cast<const ParseError*>(&e)) {
        return 2;
    }
    if (dynamic_cast<const NotFoundError*>(&e)) return 4;
    if (dynamic_cast<const DependencyError*>(&e) || dynamic_cast<const ConflictError*>(&e)) return 5;
    return 1;
}

void print(const Json& j) { std::cout << dump_json(j) << "\n"; }

store::Server* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Persona-driven usability simulation toolkit"};
    app.require_subcommand(1);

    std::string data = "uxsim-data";
    std::string experiment_id;
    ProviderArgs provider;
    int pool = 1;

    auto* run = app.add_subcommand("run", "Create an experiment from a config and simulate every run");
    std::string config_path;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--data", data, "Store directory")->capture_default_str();
    run->add_option("--id", experiment_id, "Experiment id (derived from the site name when omitted)");
    run->add_option("--pool", pool, "Concurrent runs")->capture_default_str();
    add_provider_flags(run, provider);

    auto* annotate_cmd = app.add_subcommand("annotate", "Tag intents and detect issues for a finished experiment");
    annotate::AnnotationOptions annotation;
    annotate_cmd->add_option("--data", data, "Store directory")->capture_default_str();
    annotate_cmd->add_option("--experiment", experiment_id, "Experiment id")->required();
    annotate_cmd->add_option("--rounds", annotation.rounds, "Tagging refinement rounds")->capture_default_str();
    annotate_cmd->add_option("--threshold", annotation.threshold, "Stop refining at this score")->capture_default_str();
    annotate_cmd->add_option("--pool", annotation.pool, "Concurrent annotation calls")->capture_default_str();
    add_provider_flags(annotate_cmd, provider);

    auto* report = app.add_subcommand("report", "Print the aggregated report of an annotated experiment");
    std::string format = "json";
    std::string out_path;
    report->add_option("--data", data, "Store directory")->capture_default_str();
    report->add_option("--experiment", experiment_id, "Experiment id")->required();
    report->add_option("--format", format, "json or md")->check(CLI::IsMember({"json", "md"}))->capture_default_str();
    report->add_option("--out", out_path, "Write to a file instead of stdout");

    auto* patch_cmd = app.add_subcommand("patch", "Apply a patchset to an HTML snapshot");
    std::string snapshot_path, patchset_path;
    patch_cmd->add_option("--snapshot", snapshot_path, "HTML file")->required()->check(CLI::ExistingFile);
    patch_cmd->add_option("--patchset", patchset_path, "PatchSet JSON file")->required()->check(CLI::ExistingFile);
    patch_cmd->add_option("--out", out_path, "Where to write the patched HTML");

    auto* preview = app.add_subcommand("preview", "Replay an issue's step against a modified snapshot");
    std::string run_dir, issue_id;
    preview->add_option("--run", run_dir, "Experiment directory")->required()->check(CLI::ExistingDirectory);
    preview->add_option("--issue", issue_id, "Issue id")->required();
    preview->add_option("--snapshot", snapshot_path, "Modified HTML file")->required()->check(CLI::ExistingFile);
    add_provider_flags(preview, provider);

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--data", data, "Store directory")->capture_default_str();
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Port")->capture_default_str();
    serve->add_option("--pool", pool, "Concurrent runs per experiment")->capture_default_str();
    add_provider_flags(serve, provider);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto config = persona::load_config(config_path);
            store::Store st(data);
            auto record = st.create(config, experiment_id);
            auto gateway = provider.gateway(config);
            auto outcomes = st.run(record.id, *gateway, store::environment_factory(config), pool);
            std::size_t failed = 0;
            for (const auto& o : outcomes) failed += o.failure ? 1 : 0;
            print({{"version", "1.0"},
                   {"experiment_id", record.id},
                   {"runs", outcomes.size()},
                   {"failed", failed},
                   {"directory", st.experiment_dir(record.id).string()}});
            return failed ? 1 : 0;
        }
        if (*annotate_cmd) {
            store::Store st(data);
            auto record = st.record(experiment_id);
            auto gateway = provider.gateway(record.config);
            auto result = st.annotate(experiment_id, *gateway, annotation);
            print({{"version", "1.0"},
                   {"experiment_id", experiment_id},
                   {"annotated_runs", result.issues.size()},
                   {"flagged_runs", result.flags.size()},
                   {"best_round", result.best_round}});
            return 0;
        }
        if (*report) {
            store::Store st(data);
            auto exp = st.load(experiment_id);
            auto text = format == "md" ? analyze::report_markdown(exp) : dump_json(analyze::report_json(exp)) + "\n";
            if (out_path.empty()) std::cout << text;
            else fs::write_file_atomic(out_path, text);
            return 0;
        }
        if (*patch_cmd) {
            auto html = fs::read_file(snapshot_path);
            auto ps = patch::patchset_from_json(parse_json(fs::read_file(patchset_path), patchset_path));
            auto result = patch::apply_patchset(html, ps);
            if (!out_path.empty() && result.status == patch::Status::ok) fs::write_file_atomic(out_path, result.html);
            print(patch::to_json(result));
            return result.status == patch::Status::ok ? 0 : 3;
        }
        if (*preview) {
            std::filesystem::path dir = std::filesystem::absolute(run_dir).lexically_normal();
            if (dir.filename().empty()) dir = dir.parent_path();
            store::Store st(dir.parent_path().parent_path());
            auto exp = st.load(dir.filename().string());
            env::BlobStore blobs(dir / "blobs");
            auto ref = blobs.put(fs::read_file(snapshot_path));
            auto gateway = provider.gateway(exp.config);
            print(refine::to_json(refine::preview_replay(exp, blobs, issue_id, ref, *gateway)));
            return 0;
        }
        if (*serve) {
            store::Store st(data);
            store::ServerOptions options;
            auto shared = std::make_shared<ProviderArgs>(provider);
            options.make_gateway = [shared](const persona::ExperimentConfig& c) { return shared->gateway(c); };
            options.pool = pool;
            store::Server server(st, options);
            g_server = &server;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            std::fprintf(stderr, "serving %s on http://%s:%d\n", data.c_str(), host.c_str(), port);
            bool ok = server.listen(host, port);
            g_server = nullptr;
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "uxsim: %s\n", e.what());
        return exit_code_for(e);
    }
    return 0;
}
