// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "uxsim/env/cdp.hpp"

namespace httplib {
class Server;
}

namespace uxsim::testkit {

// In-process stand-in for a browser's remote-debugging endpoint. Serves
// /json/list over HTTP and answers protocol commands on a websocket from a
// table of static pages. Clicks navigate when the clicked selector has a
// route; script evaluation recognizes only the expressions the environment
// sends.
class FakeBrowser {
public:
    explicit FakeBrowser(std::map<std::string, std::string> pages);
    ~FakeBrowser();
    FakeBrowser(const FakeBrowser&) = delete;
    FakeBrowser& operator=(const FakeBrowser&) = delete;

    env::CdpEndpoint endpoint() const { return {"127.0.0.1", http_port_}; }
    std::string ws_url() const;
    // selector -> url navigated to when that element is clicked.
    void route_click(const std::string& selector, const std::string& url);

    std::vector<std::string> methods() const;
    std::vector<std::string> typed() const;
    std::string current_url() const;
    int scroll() const;

private:
    struct Ws;
    void serve_ws();
    std::string handle(const std::string& message, std::vector<std::string>& events);

    std::map<std::string, std::string> pages_;
    std::map<std::string, std::string> click_routes_;
    std::vector<std::string> history_;
    std::size_t history_index_ = 0;
    std::string current_;
    std::string last_selector_;
    int scroll_ = 0;
    std::vector<std::string> methods_;
    std::vector<std::string> typed_;
    mutable std::mutex mu_;

    std::unique_ptr<Ws> ws_;
    std::unique_ptr<httplib::Server> http_;
    int http_port_ = 0;
    std::thread http_thread_;
    std::thread ws_thread_;
};

}  // namespace uxsim::testkit
