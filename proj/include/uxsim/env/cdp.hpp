// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uxsim/common/json.hpp"
#include "uxsim/env/environment.hpp"

namespace uxsim::env {

struct CdpEndpoint {
    std::string host = "127.0.0.1";
    int port = 9222;
};

// Page targets reported by the browser's /json/list discovery endpoint.
// Throws EnvironmentError when the endpoint is unreachable.
std::vector<Json> list_targets(const CdpEndpoint& endpoint);

// "scheme://host[:port]" of an absolute url; empty for relative urls.
std::string url_origin(std::string_view url);

// Synchronous remote-debugging protocol client over one websocket. Commands
// are matched to responses by id; events that arrive in between are queued.
class CdpClient {
public:
    explicit CdpClient(const std::string& ws_url, std::chrono::milliseconds timeout = std::chrono::seconds(30));
    ~CdpClient();
    CdpClient(const CdpClient&) = delete;
    CdpClient& operator=(const CdpClient&) = delete;

    // Returns the command's result object; protocol errors throw
    // EnvironmentError carrying the method name and message.
    Json call(const std::string& method, Json params = Json::object());
    // Params of the next queued or incoming event named `method`.
    Json wait_event(const std::string& method);
    std::vector<Json> drain_events();

private:
    struct Impl;
    Json read_message();

    std::unique_ptr<Impl> impl_;
    long next_id_ = 1;
    std::deque<Json> events_;
};

struct CdpOptions {
    CdpEndpoint endpoint;
    // Origin treated as "the site"; pages elsewhere count as off-site.
    std::string site_origin;
    bool capture_screenshots = false;
    std::chrono::milliseconds load_timeout{15000};
};

// Live browser session attached to the first page target.
class CdpEnvironment : public Environment {
public:
    explicit CdpEnvironment(CdpOptions options);
    CdpEnvironment(CdpOptions options, std::unique_ptr<CdpClient> client);

    void open(const std::string& url) override;
    PageState observe() override;
    std::string execute(const AgentAction& action) override;
    std::string current_html() override;
    std::string current_url() const override { return url_; }
    bool off_site() const override;
    std::optional<std::string> screenshot() override;

private:
    Json evaluate(const std::string& expression);
    void navigate(const std::string& url);
    void wait_for_load();
    void refresh_url();
    const ElementInfo& element_for(const AgentAction& action) const;

    CdpOptions options_;
    std::unique_ptr<CdpClient> client_;
    std::string url_;
    std::optional<PageState> last_state_;
};

std::string base64_decode(std::string_view encoded);

}  // namespace uxsim::env
