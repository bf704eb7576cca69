// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace uxsim::fs {

std::string read_file(const std::filesystem::path& p);

// Write-then-rename so readers never observe a torn file.
void write_file_atomic(const std::filesystem::path& p, std::string_view bytes);

// Appends bytes and flushes; used by the append-only event logs.
void append_file(const std::filesystem::path& p, std::string_view bytes);

}  // namespace uxsim::fs
