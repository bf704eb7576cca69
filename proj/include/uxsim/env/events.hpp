// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uxsim/common/json.hpp"
#include "uxsim/env/page_state.hpp"

namespace uxsim::env {

// One perception-decision-action record. page_state is the observation the
// decision was made on; prompt_text is the length-framed prompt sent.
struct StepEvent {
    std::string run_id;
    int step = 0;
    std::string timestamp;
    std::string url;
    std::string raw_html_ref;
    std::string prompt_text;
    std::vector<TabInfo> tabs;
    std::optional<std::string> screenshot_ref;
    AgentAction action;
    std::string intent;
    std::string reasoning;
    std::string result;
    std::optional<std::string> error;
    PageState page_state;

    bool operator==(const StepEvent&) const = default;
};

// Timestamps are omitted when `with_timestamp` is false so logs can be
// compared across runs.
Json to_json(const StepEvent& e, bool with_timestamp = true);
StepEvent step_event_from_json(const Json& j);

std::string utc_timestamp();

// Write-once content-addressed files: blobs/<sha256>.<ext>.
class BlobStore {
public:
    explicit BlobStore(std::filesystem::path dir);

    // Stores the bytes unless already present; returns the hex digest.
    std::string put(std::string_view bytes, std::string_view ext = "html");
    // Throws NotFoundError when absent and IntegrityError when the bytes no
    // longer hash to `ref`.
    std::string get(const std::string& ref, std::string_view ext = "html") const;
    bool contains(const std::string& ref, std::string_view ext = "html") const;
    std::filesystem::path path_for(const std::string& ref, std::string_view ext = "html") const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
};

// Append-only newline-delimited StepEvent log for one run.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path);

    // Throws ValidationError unless steps strictly increase and the required
    // provenance fields are present.
    void append(const StepEvent& e);
    std::vector<StepEvent> read_all() const;
    const std::filesystem::path& path() const { return path_; }

    static std::vector<StepEvent> read(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    int last_step_ = 0;
    mutable std::mutex mu_;
};

// Multi-producer fan-out. Handlers run synchronously on the publishing
// thread and must be thread-safe.
class EventBus {
public:
    using Handler = std::function<void(const StepEvent&)>;

    std::uint64_t subscribe(Handler handler);
    void unsubscribe(std::uint64_t id);
    void publish(const StepEvent& e) const;

private:
    mutable std::mutex mu_;
    std::uint64_t next_id_ = 1;
    std::map<std::uint64_t, Handler> handlers_;
};

// Completes, persists and publishes step events for one run.
class SnapshotEmitter {
public:
    SnapshotEmitter(BlobStore& blobs, EventLog& log, EventBus* bus);

    // Stores the HTML (and screenshot, if any) content-addressed, fills the
    // refs and timestamp, appends to the log and publishes. Storage failures
    // propagate as StorageError.
    StepEvent emit(StepEvent partial, std::string_view html, const std::optional<std::string>& screenshot_png);

private:
    BlobStore& blobs_;
    EventLog& log_;
    EventBus* bus_;
};

}  // namespace uxsim::env
