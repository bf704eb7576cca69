// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "support.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/persona/persona.hpp"

using namespace uxsim;
using persona::ExperimentConfig;

namespace {

ExperimentConfig minimal_config() {
    ExperimentConfig c;
    c.site = {"Shop", "shop", "index.html"};
    c.dimensions = {{"PS", "Price Sensitivity", {"budget", "flexible"}}};
    c.goals = {{"g1", "Find something"}};
    return c;
}

// Recursive reference expansion: first dimension slowest, replica fastest.
void reference_expand(const ExperimentConfig& c, std::size_t d, std::vector<std::string>& chosen,
                      std::vector<std::vector<std::string>>& out) {
    if (d == c.dimensions.size()) {
        for (int r = 1; r <= c.replication; ++r) {
            auto row = chosen;
            row.push_back("r" + std::to_string(r));
            out.push_back(row);
        }
        return;
    }
    for (const auto& v : c.dimensions[d].values) {
        chosen.push_back(v);
        reference_expand(c, d + 1, chosen, out);
        chosen.pop_back();
    }
}

}  // namespace

TEST(Persona, FullTraitConfigYields32) {
    auto config = persona::load_config(testkit::source_path("fixtures/full-traits.json"));
    auto personas = persona::expand_traits(config);
    ASSERT_EQ(personas.size(), 32u);
    EXPECT_EQ(personas.front().id, "p-budget-rushed-18_34-new-r1");
    EXPECT_EQ(personas[1].id, "p-budget-rushed-18_34-new-r2");
    EXPECT_EQ(personas[2].id, "p-budget-rushed-18_34-returning-r1");
    EXPECT_EQ(personas.back().id, "p-flexible-normal-55-returning-r2");
    std::set<std::string> ids;
    for (const auto& p : personas) ids.insert(p.id);
    EXPECT_EQ(ids.size(), 32u);
}

TEST(Persona, ExpansionIsDeterministic) {
    auto config = persona::load_config(testkit::source_path("fixtures/full-traits.json"));
    EXPECT_EQ(persona::expand_traits(config), persona::expand_traits(config));
}

TEST(Persona, TraitLookupAndCompositeKeyIgnoreReplica) {
    auto personas = persona::expand_traits(testkit::shop_config());
    EXPECT_EQ(personas[0].trait("PS"), "budget");
    EXPECT_EQ(personas[0].trait("XX"), "");
    auto c = minimal_config();
    c.replication = 2;
    auto reps = persona::expand_traits(c);
    EXPECT_EQ(reps[0].composite_key(), reps[1].composite_key());
    EXPECT_NE(reps[0].composite_key(), reps[2].composite_key());
}

TEST(Persona, PropertyCountAndOrderMatchReference) {
    testkit::Rng rng(7);
    for (int iter = 0; iter < 300; ++iter) {
        ExperimentConfig c = minimal_config();
        c.dimensions.clear();
        int dims = rng.uniform(0, 4);
        std::size_t expected = 1;
        for (int d = 0; d < dims; ++d) {
            persona::TraitDimension dim;
            dim.name = "D" + std::to_string(d);
            int n = rng.uniform(1, 4);
            for (int v = 0; v < n; ++v) dim.values.push_back(dim.name + "v" + std::to_string(v));
            expected *= static_cast<std::size_t>(n);
            c.dimensions.push_back(dim);
        }
        c.replication = rng.uniform(1, 3);
        expected *= static_cast<std::size_t>(c.replication);

        auto personas = persona::expand_traits(c);
        ASSERT_EQ(personas.size(), expected);

        std::vector<std::vector<std::string>> ref;
        std::vector<std::string> chosen;
        reference_expand(c, 0, chosen, ref);
        ASSERT_EQ(ref.size(), personas.size());
        for (std::size_t i = 0; i < personas.size(); ++i) {
            for (std::size_t d = 0; d < c.dimensions.size(); ++d) EXPECT_EQ(personas[i].traits[d].value, ref[i][d]);
            EXPECT_EQ("r" + std::to_string(personas[i].replica_index), ref[i].back());
        }
    }
}

TEST(Persona, ValidationRejectsBrokenConfigs) {
    auto c = minimal_config();
    c.replication = 0;
    EXPECT_THROW(persona::validate(c), ConfigError);
    c = minimal_config();
    c.dimensions.push_back(c.dimensions.front());
    EXPECT_THROW(persona::validate(c), ConfigError);
    c = minimal_config();
    c.dimensions[0].values = {"a", "a"};
    EXPECT_THROW(persona::validate(c), ConfigError);
    c = minimal_config();
    c.goals.clear();
    EXPECT_THROW(persona::validate(c), ConfigError);
    c = minimal_config();
    c.goals[0].id = "has space";
    EXPECT_THROW(persona::validate(c), ConfigError);
    c = minimal_config();
    c.temperature_overrides["simulation"] = 3.0;
    EXPECT_THROW(persona::validate(c), ConfigError);
    c = minimal_config();
    c.temperature_overrides["dreaming"] = 0.5;
    EXPECT_THROW(persona::validate(c), ConfigError);
}

TEST(Persona, PromptListsLabelledTraits) {
    auto config = persona::load_config(testkit::source_path("fixtures/full-traits.json"));
    auto p = persona::expand_traits(config).back();
    auto prompt = persona::render_persona_prompt(p);
    EXPECT_NE(prompt.find("Price Sensitivity: flexible"), std::string::npos);
    EXPECT_NE(prompt.find("Age Cohort: 55+"), std::string::npos);
    EXPECT_EQ(prompt.find("{persona_features}"), std::string::npos);
}

TEST(Persona, ConfigJsonRoundTrip) {
    auto config = testkit::shop_config();
    auto again = persona::config_from_json(persona::to_json(config));
    EXPECT_EQ(persona::to_json(again), persona::to_json(config));
}

TEST(Persona, PersonaJsonRoundTrip) {
    for (const auto& p : persona::expand_traits(testkit::shop_config())) {
        EXPECT_EQ(persona::persona_from_json(persona::to_json(p)), p);
    }
}

TEST(Persona, LoadConfigRebasesSnapshotDirectory) {
    auto config = testkit::shop_config();
    EXPECT_TRUE(std::filesystem::path(config.site.url).is_absolute());
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(config.site.url) / "index.html"));
    EXPECT_FALSE(config.site.is_live());
}

TEST(Persona, MalformedConfigIsConfigError) {
    testkit::TempDir dir;
    std::ofstream(dir / "bad.json") << R"({"version": "1.0", "site": 3})";
    EXPECT_THROW(persona::load_config(dir / "bad.json"), ConfigError);
    std::ofstream(dir / "v2.json") << R"({"version": "2.0"})";
    EXPECT_THROW(persona::load_config(dir / "v2.json"), ConfigError);
}
