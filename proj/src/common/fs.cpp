// SPDX-License-Identifier: Apache-2.0

#include "uxsim/common/fs.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "uxsim/common/error.hpp"

namespace uxsim::fs {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw StorageError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& p, std::string_view bytes) {
    static std::atomic<unsigned> counter{0};
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    auto tmp = p;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
           std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw StorageError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, p, ec);
    if (ec) throw StorageError("cannot rename " + tmp.string() + ": " + ec.message());
}

void append_file(const std::filesystem::path& p, std::string_view bytes) {
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::app);
    if (!out) throw StorageError("cannot append to " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw StorageError("short append to " + p.string());
}

}  // namespace uxsim::fs
