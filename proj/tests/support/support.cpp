// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <atomic>
#include <chrono>

#include "uxsim/annotate/annotate.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/env/page_state.hpp"
#include "uxsim/persona/persona.hpp"

namespace uxsim::testkit {

std::filesystem::path source_path(const std::string& relative) {
    return std::filesystem::path(UXSIM_SOURCE_DIR) / relative;
}

Json load_fixture_json(const std::string& relative) {
    return parse_json(fs::read_file(source_path(relative)), relative);
}

std::string load_fixture_text(const std::string& relative) { return fs::read_file(source_path(relative)); }

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("uxsim-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string Rng::word(int min_len, int max_len) {
    std::string w;
    int n = uniform(min_len, max_len);
    for (int i = 0; i < n; ++i) w.push_back(static_cast<char>('a' + uniform(0, 25)));
    return w;
}

std::shared_ptr<llm::Gateway> gateway_for(std::shared_ptr<llm::ChatProvider> provider) {
    llm::GatewayOptions options;
    options.backoff_base = std::chrono::milliseconds(0);
    return std::make_shared<llm::Gateway>(std::move(provider), options);
}

std::shared_ptr<llm::Gateway> scripted_gateway(std::vector<llm::ScriptEntry> entries) {
    return gateway_for(std::make_shared<llm::ScriptedProvider>(std::move(entries)));
}

std::shared_ptr<llm::Gateway> scripted_gateway(const std::string& transcript_fixture) {
    return scripted_gateway(llm::ScriptedProvider::load(source_path(transcript_fixture)));
}

std::string decision_reply(const std::string& kind, std::optional<int> target, std::optional<std::string> payload,
                           std::optional<bool> success, const std::string& intent, const std::string& reasoning) {
    Json action;
    action["kind"] = kind;
    if (target) action["target_index"] = *target;
    if (payload) action["payload"] = *payload;
    if (success) action["success"] = *success;
    Json body;
    body["intent"] = intent;
    body["reasoning"] = reasoning;
    body["action"] = action;
    return reasoning + "\n```json\n" + body.dump() + "\n```";
}

agent::Trace make_trace(const std::string& run_id, const std::string& persona_id, const std::string& goal_id,
                        int n_steps, bool success) {
    agent::Trace t;
    t.run_id = run_id;
    t.persona_id = persona_id;
    t.goal_id = goal_id;
    for (int k = 1; k <= n_steps; ++k) {
        env::StepEvent e;
        e.run_id = run_id;
        e.step = k;
        e.url = "/page" + std::to_string(k) + ".html";
        e.raw_html_ref = std::string(64, '0');
        e.page_state = env::extract_page_state("<a id=\"next\" href=\"/page" + std::to_string(k + 1) +
                                                   ".html\">Next</a>",
                                               e.url, 0);
        if (k == n_steps) {
            e.action.kind = env::ActionKind::done;
            e.action.success = success;
        } else {
            e.action.kind = env::ActionKind::click;
            e.action.target_index = 1;
        }
        e.intent = "intent " + std::to_string(k);
        e.reasoning = "reasoning for step " + std::to_string(k);
        e.result = "ok";
        t.steps.push_back(e);
    }
    t.terminal = {true, success, std::string(agent::kReasonDone)};
    return t;
}

persona::ExperimentConfig shop_config() { return persona::load_config(source_path("fixtures/shop-experiment.json")); }

ShopPipeline run_shop_pipeline(const std::filesystem::path& root, bool annotate) {
    ShopPipeline p;
    p.store = std::make_unique<store::Store>(root);
    auto config = shop_config();
    p.store->create(config, p.experiment_id);
    auto sim = scripted_gateway("fixtures/transcripts/simulate.json");
    p.store->run(p.experiment_id, *sim, store::environment_factory(config), 1);
    if (annotate) {
        auto ann = scripted_gateway("fixtures/transcripts/annotate.json");
        annotate::AnnotationOptions options;
        p.store->annotate(p.experiment_id, *ann, options);
    }
    return p;
}

}  // namespace uxsim::testkit
