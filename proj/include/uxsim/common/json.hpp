// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <string>
#include <string_view>

namespace uxsim {

// Insertion-ordered JSON keeps every emitted document byte-stable.
using Json = nlohmann::ordered_json;

// Serializes with invalid UTF-8 replaced instead of throwing; indent < 0
// produces the compact form.
std::string dump_json(const Json& j, int indent = 2);

// Parses or throws ParseError with `what` naming the document.
Json parse_json(std::string_view text, std::string_view what);

// Typed field accessors that throw ValidationError naming the missing key.
const Json& require_field(const Json& obj, std::string_view key, std::string_view ctx);
std::string require_string(const Json& obj, std::string_view key, std::string_view ctx);

}  // namespace uxsim
