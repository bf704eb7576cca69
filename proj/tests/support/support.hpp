// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "uxsim/agent/agent.hpp"
#include "uxsim/analyze/analyze.hpp"
#include "uxsim/common/json.hpp"
#include "uxsim/llm/gateway.hpp"
#include "uxsim/llm/mock_provider.hpp"
#include "uxsim/store/store.hpp"

namespace uxsim::testkit {

// Absolute path of a file in the source tree.
std::filesystem::path source_path(const std::string& relative);
Json load_fixture_json(const std::string& relative);
std::string load_fixture_text(const std::string& relative);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

// Seeded generator for hand-rolled property tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    bool coin() { return uniform(0, 1) == 1; }
    double real() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    std::string word(int min_len = 1, int max_len = 8);
    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))]; }

private:
    std::mt19937_64 engine_;
};

std::shared_ptr<llm::Gateway> scripted_gateway(std::vector<llm::ScriptEntry> entries);
std::shared_ptr<llm::Gateway> scripted_gateway(const std::string& transcript_fixture);
// Gateway with zero backoff so retry tests stay fast.
std::shared_ptr<llm::Gateway> gateway_for(std::shared_ptr<llm::ChatProvider> provider);

// Fenced decision reply in the agent's exchange format.
std::string decision_reply(const std::string& kind, std::optional<int> target = std::nullopt,
                           std::optional<std::string> payload = std::nullopt, std::optional<bool> success = std::nullopt,
                           const std::string& intent = "look around", const std::string& reasoning = "Thinking.");

// Synthetic trace of `n_steps` steps (clicks, last one done) with simple
// page states; good enough for annotation and analysis unit tests.
agent::Trace make_trace(const std::string& run_id, const std::string& persona_id, const std::string& goal_id,
                        int n_steps, bool success = true);

persona::ExperimentConfig shop_config();

// Store with the fixture shop experiment simulated and annotated from the
// scripted transcripts under `root`.
struct ShopPipeline {
    std::unique_ptr<store::Store> store;
    std::string experiment_id = "shop-fixture";
    analyze::Experiment load() const { return store->load(experiment_id); }
    std::filesystem::path dir() const { return store->experiment_dir(experiment_id); }
};
ShopPipeline run_shop_pipeline(const std::filesystem::path& root, bool annotate = true);

}  // namespace uxsim::testkit
