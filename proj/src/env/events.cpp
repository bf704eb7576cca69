// SPDX-License-Identifier: Apache-2.0

#include "uxsim/env/events.hpp"

#include <chrono>
#include <ctime>

#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/common/hash.hpp"
#include "uxsim/common/text.hpp"

namespace uxsim::env {

namespace {

bool is_digest(std::string_view ref) {
    if (ref.size() != 64) return false;
    for (char c : ref) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

}  // namespace

Json to_json(const StepEvent& e, bool with_timestamp) {
    Json j;
    j["run_id"] = e.run_id;
    j["step"] = e.step;
    if (with_timestamp) j["timestamp"] = e.timestamp;
    j["url"] = e.url;
    j["raw_html_ref"] = e.raw_html_ref;
    if (e.screenshot_ref) j["screenshot_ref"] = *e.screenshot_ref;
    Json tabs = Json::array();
    for (const auto& t : e.tabs) tabs.push_back({{"id", t.id}, {"url", t.url}, {"title", t.title}});
    j["tabs"] = tabs;
    j["action"] = to_json(e.action);
    j["intent"] = e.intent;
    j["reasoning"] = e.reasoning;
    j["result"] = e.result;
    if (e.error) j["error"] = *e.error;
    j["page_state"] = to_json(e.page_state);
    j["prompt_text"] = e.prompt_text;
    return j;
}

StepEvent step_event_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("step event must be an object");
    StepEvent e;
    e.run_id = require_string(j, "run_id", "step event");
    e.step = require_field(j, "step", "step event").get<int>();
    e.timestamp = j.value("timestamp", "");
    e.url = require_string(j, "url", "step event");
    e.raw_html_ref = require_string(j, "raw_html_ref", "step event");
    e.prompt_text = require_string(j, "prompt_text", "step event");
    e.screenshot_ref = optional_string(j, "screenshot_ref");
    for (const auto& t : j.value("tabs", Json::array())) {
        e.tabs.push_back({t.value("id", ""), t.value("url", ""), t.value("title", "")});
    }
    e.action = action_from_json(require_field(j, "action", "step event"));
    e.intent = j.value("intent", "");
    e.reasoning = j.value("reasoning", "");
    e.result = j.value("result", "");
    e.error = optional_string(j, "error");
    if (j.contains("page_state")) e.page_state = page_state_from_json(j.at("page_state"));
    return e;
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    auto secs = std::chrono::system_clock::to_time_t(now);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

BlobStore::BlobStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw StorageError("cannot create blob directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path BlobStore::path_for(const std::string& ref, std::string_view ext) const {
    if (!is_digest(ref)) throw NotFoundError("malformed blob reference '" + ref + "'");
    return dir_ / (ref + "." + std::string(ext));
}

std::string BlobStore::put(std::string_view bytes, std::string_view ext) {
    auto ref = sha256_hex(bytes);
    auto path = path_for(ref, ext);
    std::lock_guard lock(mu_);
    if (!std::filesystem::exists(path)) fs::write_file_atomic(path, bytes);
    return ref;
}

std::string BlobStore::get(const std::string& ref, std::string_view ext) const {
    auto path = path_for(ref, ext);
    if (!std::filesystem::exists(path)) throw NotFoundError("blob " + ref + " not found");
    auto bytes = fs::read_file(path);
    if (sha256_hex(bytes) != ref) throw IntegrityError("blob " + ref + " does not match its content hash");
    return bytes;
}

bool BlobStore::contains(const std::string& ref, std::string_view ext) const {
    return is_digest(ref) && std::filesystem::exists(dir_ / (ref + "." + std::string(ext)));
}

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
    if (std::filesystem::exists(path_)) {
        auto events = read(path_);
        if (!events.empty()) last_step_ = events.back().step;
    }
}

void EventLog::append(const StepEvent& e) {
    if (e.raw_html_ref.empty()) throw ValidationError("step event without raw_html_ref");
    if (e.prompt_text.empty()) throw ValidationError("step event without prompt_text");
    std::lock_guard lock(mu_);
    if (e.step <= last_step_) {
        throw ValidationError("step " + std::to_string(e.step) + " does not follow step " + std::to_string(last_step_));
    }
    fs::append_file(path_, dump_json(to_json(e), -1) + "\n");
    last_step_ = e.step;
}

std::vector<StepEvent> EventLog::read_all() const {
    std::lock_guard lock(mu_);
    return read(path_);
}

std::vector<StepEvent> EventLog::read(const std::filesystem::path& path) {
    std::vector<StepEvent> out;
    auto content = fs::read_file(path);
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < content.size()) {
        auto end = content.find('\n', start);
        // A trailing line without newline is a torn append; ignore it.
        if (end == std::string::npos) break;
        ++line_no;
        auto line = std::string_view(content).substr(start, end - start);
        start = end + 1;
        if (text::trim(line).empty()) continue;
        out.push_back(step_event_from_json(parse_json(line, path.string() + ":" + std::to_string(line_no))));
    }
    return out;
}

std::uint64_t EventBus::subscribe(Handler handler) {
    std::lock_guard lock(mu_);
    auto id = next_id_++;
    handlers_.emplace(id, std::move(handler));
    return id;
}

void EventBus::unsubscribe(std::uint64_t id) {
    std::lock_guard lock(mu_);
    handlers_.erase(id);
}

void EventBus::publish(const StepEvent& e) const {
    std::vector<Handler> snapshot;
    {
        std::lock_guard lock(mu_);
        for (const auto& [id, h] : handlers_) snapshot.push_back(h);
    }
    for (const auto& h : snapshot) h(e);
}

SnapshotEmitter::SnapshotEmitter(BlobStore& blobs, EventLog& log, EventBus* bus) : blobs_(blobs), log_(log), bus_(bus) {}

StepEvent SnapshotEmitter::emit(StepEvent partial, std::string_view html,
                                const std::optional<std::string>& screenshot_png) {
    partial.raw_html_ref = blobs_.put(html, "html");
    if (screenshot_png) {
        partial.screenshot_ref = blobs_.put(*screenshot_png, "png");
        partial.page_state.screenshot_ref = partial.screenshot_ref;
    }
    if (partial.timestamp.empty()) partial.timestamp = utc_timestamp();
    log_.append(partial);
    if (bus_) bus_->publish(partial);
    return partial;
}

}  // namespace uxsim::env
