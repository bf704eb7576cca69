// SPDX-License-Identifier: Apache-2.0

#include "uxsim/persona/persona.hpp"

#include <set>

#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/common/text.hpp"
#include "uxsim/prompts/templates.hpp"

namespace uxsim::persona {

namespace {

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                  c == '-';
        if (!ok) return false;
    }
    return true;
}

// Per-dimension value slugs. '-' separates id segments, so values use '_'
// internally; collisions inside one dimension get an index suffix.
std::vector<std::string> value_slugs(const TraitDimension& dim) {
    std::vector<std::string> out;
    std::set<std::string> used;
    for (std::size_t i = 0; i < dim.values.size(); ++i) {
        auto slug = text::slugify(dim.values[i], '_');
        if (slug.empty()) slug = "v" + std::to_string(i + 1);
        auto candidate = slug;
        while (used.count(candidate)) candidate += "_" + std::to_string(i + 1);
        used.insert(candidate);
        out.push_back(candidate);
    }
    return out;
}

}  // namespace

bool SiteRef::is_live() const {
    return text::starts_with(url, "http://") || text::starts_with(url, "https://");
}

std::string Persona::trait(const std::string& dimension) const {
    for (const auto& t : traits) {
        if (t.dimension == dimension) return t.value;
    }
    return {};
}

std::string Persona::composite_key() const {
    std::string key;
    for (const auto& t : traits) {
        if (!key.empty()) key += "|";
        key += t.dimension + "=" + t.value;
    }
    return key;
}

void validate(const ExperimentConfig& config) {
    if (config.replication < 1) throw ConfigError("replication must be >= 1");
    if (config.max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (config.n_tags < 1) throw ConfigError("n_tags must be >= 1");
    if (config.history_window < 0) throw ConfigError("history_window must be >= 0");
    if (config.goals.empty()) throw ConfigError("at least one goal is required");

    std::set<std::string> dim_names;
    for (const auto& dim : config.dimensions) {
        if (dim.name.empty()) throw ConfigError("trait dimension with empty name");
        if (!dim_names.insert(dim.name).second) throw ConfigError("duplicate trait dimension '" + dim.name + "'");
        if (dim.values.empty()) throw ConfigError("trait dimension '" + dim.name + "' has no values");
        std::set<std::string> vals;
        for (const auto& v : dim.values) {
            if (v.empty()) throw ConfigError("trait dimension '" + dim.name + "' has an empty value");
            if (!vals.insert(v).second) {
                throw ConfigError("duplicate value '" + v + "' in trait dimension '" + dim.name + "'");
            }
        }
    }

    std::set<std::string> goal_ids;
    for (const auto& g : config.goals) {
        if (!is_identifier(g.id)) throw ConfigError("goal id '" + g.id + "' must match [A-Za-z0-9_-]+");
        if (!goal_ids.insert(g.id).second) throw ConfigError("duplicate goal id '" + g.id + "'");
        if (text::trim(g.text).empty()) throw ConfigError("goal '" + g.id + "' has empty text");
    }
    for (const auto& [purpose, t] : config.temperature_overrides) {
        if (purpose != "simulation" && purpose != "annotation" && purpose != "refinement") {
            throw ConfigError("unknown temperature purpose '" + purpose + "'");
        }
        if (t < 0.0 || t > 2.0) throw ConfigError("temperature for '" + purpose + "' outside [0, 2]");
    }
}

std::vector<Persona> expand_traits(const ExperimentConfig& config) {
    validate(config);

    std::vector<std::vector<std::string>> slugs;
    for (const auto& dim : config.dimensions) slugs.push_back(value_slugs(dim));

    std::vector<Persona> out;
    std::vector<std::size_t> choice(config.dimensions.size(), 0);
    while (true) {
        for (int r = 1; r <= config.replication; ++r) {
            Persona p;
            p.replica_index = r;
            p.id = "p";
            for (std::size_t d = 0; d < config.dimensions.size(); ++d) {
                const auto& dim = config.dimensions[d];
                p.traits.push_back({dim.name, dim.display_label(), dim.values[choice[d]]});
                p.id += "-" + slugs[d][choice[d]];
            }
            p.id += "-r" + std::to_string(r);
            out.push_back(std::move(p));
        }
        // Odometer increment, last dimension fastest.
        std::size_t d = config.dimensions.size();
        while (d > 0) {
            --d;
            if (++choice[d] < config.dimensions[d].values.size()) break;
            choice[d] = 0;
            if (d == 0) return out;
        }
        if (config.dimensions.empty()) return out;
    }
}

std::string render_persona_prompt(const Persona& persona) {
    std::string features;
    for (const auto& t : persona.traits) {
        if (!features.empty()) features += "\n";
        features += t.label + ": " + t.value;
    }
    return text::substitute(prompts::kPersonaPrompt, {{"persona_features", features}});
}

Json to_json(const ExperimentConfig& config) {
    Json j;
    j["version"] = "1.0";
    j["site"] = {{"name", config.site.name}, {"url", config.site.url}, {"start", config.site.start}};
    j["dimensions"] = Json::array();
    for (const auto& d : config.dimensions) {
        j["dimensions"].push_back({{"name", d.name}, {"label", d.display_label()}, {"values", d.values}});
    }
    j["replication"] = config.replication;
    j["goals"] = Json::array();
    for (const auto& g : config.goals) j["goals"].push_back({{"id", g.id}, {"text", g.text}});
    j["directives"] = config.directives;
    j["max_steps"] = config.max_steps;
    j["n_tags"] = config.n_tags;
    j["history_window"] = config.history_window;
    j["adjacency_threshold"] = config.adjacency_threshold;
    j["temperature"] = Json::object();
    for (const auto& [k, v] : config.temperature_overrides) j["temperature"][k] = v;
    return j;
}

ExperimentConfig config_from_json(const Json& j) {
    try {
        ExperimentConfig c;
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        if (j.contains("version") && j.at("version") != "1.0") throw ConfigError("unsupported config version");
        const auto& site = j.at("site");
        c.site.name = site.value("name", std::string{});
        c.site.url = site.at("url").get<std::string>();
        c.site.start = site.value("start", std::string{"index.html"});
        for (const auto& d : j.value("dimensions", Json::array())) {
            TraitDimension dim;
            dim.name = d.at("name").get<std::string>();
            dim.label = d.value("label", std::string{});
            dim.values = d.at("values").get<std::vector<std::string>>();
            c.dimensions.push_back(std::move(dim));
        }
        c.replication = j.value("replication", 1);
        for (const auto& g : j.at("goals")) {
            c.goals.push_back({g.at("id").get<std::string>(), g.at("text").get<std::string>()});
        }
        c.directives = j.value("directives", std::string{});
        c.max_steps = j.value("max_steps", 25);
        c.n_tags = j.value("n_tags", 3);
        c.history_window = j.value("history_window", 5);
        c.adjacency_threshold = j.value("adjacency_threshold", 0.25);
        if (j.contains("temperature")) {
            for (const auto& [k, v] : j.at("temperature").items()) c.temperature_overrides[k] = v.get<double>();
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    auto c = config_from_json(parse_json(fs::read_file(path), path.string()));
    if (!c.site.is_live()) {
        std::filesystem::path dir(c.site.url);
        if (dir.is_relative()) c.site.url = (path.parent_path() / dir).lexically_normal().string();
    }
    validate(c);
    return c;
}

Json to_json(const Persona& persona) {
    Json traits = Json::array();
    for (const auto& t : persona.traits) {
        traits.push_back({{"dimension", t.dimension}, {"label", t.label}, {"value", t.value}});
    }
    return {{"id", persona.id}, {"traits", traits}, {"replica_index", persona.replica_index}};
}

Persona persona_from_json(const Json& j) {
    Persona p;
    p.id = j.at("id").get<std::string>();
    p.replica_index = j.at("replica_index").get<int>();
    for (const auto& t : j.at("traits")) {
        p.traits.push_back({t.at("dimension").get<std::string>(), t.at("label").get<std::string>(),
                            t.at("value").get<std::string>()});
    }
    return p;
}

}  // namespace uxsim::persona
