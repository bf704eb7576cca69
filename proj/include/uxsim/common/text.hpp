// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uxsim::text {

std::string trim(std::string_view s);

// Trim and collapse every run of ASCII whitespace into a single space.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

// Lowercase; runs of characters outside [a-z0-9] become `sep`.
// Leading/trailing separators are dropped.
std::string slugify(std::string_view s, char sep = '-');

bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

std::vector<std::string> split(std::string_view s, char sep);

// Replaces every `{key}` occurrence for each key in `vars`. Unknown
// placeholders are left untouched.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& vars);

// Returns the body of the first ``` fenced block (any info string), or
// nullopt if the text holds no closed fence.
std::optional<std::string> extract_fenced_block(std::string_view s);

// Returns the fenced block body if present, else the trimmed text itself.
std::string strip_code_fence(std::string_view s);

std::string truncate(std::string_view s, std::size_t max_chars);

}  // namespace uxsim::text
