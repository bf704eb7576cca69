// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "uxsim/common/json.hpp"

namespace uxsim::persona {

// A named axis of user variation, e.g. name "PS", label "Price Sensitivity",
// values {"budget", "flexible"}. The label is what prompts show; it defaults
// to the name.
struct TraitDimension {
    std::string name;
    std::string label;
    std::vector<std::string> values;

    const std::string& display_label() const { return label.empty() ? name : label; }
};

struct Goal {
    std::string id;
    std::string text;
};

// Where the agents browse. An http(s) url selects the live environment; any
// other url is a snapshot directory (resolved against the config file).
struct SiteRef {
    std::string name;
    std::string url;
    std::string start = "index.html";

    bool is_live() const;
};

struct ExperimentConfig {
    SiteRef site;
    std::vector<TraitDimension> dimensions;
    int replication = 1;
    std::vector<Goal> goals;
    std::string directives;
    int max_steps = 25;
    int n_tags = 3;
    int history_window = 5;
    double adjacency_threshold = 0.25;
    // Optional per-purpose overrides ("simulation", "annotation", "refinement").
    std::map<std::string, double> temperature_overrides;
};

struct TraitValue {
    std::string dimension;
    std::string label;
    std::string value;

    bool operator==(const TraitValue&) const = default;
};

struct Persona {
    std::string id;
    std::vector<TraitValue> traits;  // declaration order
    int replica_index = 1;

    // Returns the chosen value for a dimension name, or empty if absent.
    std::string trait(const std::string& dimension) const;
    // Stable key over the trait tuple, ignoring the replica.
    std::string composite_key() const;

    bool operator==(const Persona&) const = default;
};

// Throws ConfigError describing the first violated invariant.
void validate(const ExperimentConfig& config);

// Cartesian product of all trait values times `replication`. Order is
// lexicographic in dimension declaration order with replica fastest.
std::vector<Persona> expand_traits(const ExperimentConfig& config);

std::string render_persona_prompt(const Persona& persona);

Json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const Json& j);

// Loads and validates a config file. A relative snapshot directory is
// rebased onto the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

Json to_json(const Persona& persona);
Persona persona_from_json(const Json& j);

}  // namespace uxsim::persona
