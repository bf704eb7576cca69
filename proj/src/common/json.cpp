// SPDX-License-Identifier: Apache-2.0

#include "uxsim/common/json.hpp"

#include "uxsim/common/error.hpp"

namespace uxsim {

std::string dump_json(const Json& j, int indent) {
    return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

Json parse_json(std::string_view text, std::string_view what) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

const Json& require_field(const Json& obj, std::string_view key, std::string_view ctx) {
    if (!obj.is_object()) throw ValidationError(std::string(ctx) + ": expected a JSON object");
    auto it = obj.find(std::string(key));
    if (it == obj.end()) throw ValidationError(std::string(ctx) + ": missing field '" + std::string(key) + "'");
    return *it;
}

std::string require_string(const Json& obj, std::string_view key, std::string_view ctx) {
    const auto& v = require_field(obj, key, ctx);
    if (!v.is_string()) throw ValidationError(std::string(ctx) + ": field '" + std::string(key) + "' must be a string");
    return v.get<std::string>();
}

}  // namespace uxsim
