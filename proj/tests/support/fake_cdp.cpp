// SPDX-License-Identifier: Apache-2.0

#include "fake_cdp.hpp"

#include <httplib.h>

#include <atomic>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "uxsim/common/json.hpp"

namespace uxsim::testkit {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct FakeBrowser::Ws {
    asio::io_context ioc;
    tcp::acceptor acceptor{ioc, tcp::endpoint(asio::ip::make_address("127.0.0.1"), 0)};
    std::atomic<bool> stopping{false};
};

namespace {

bool contains(const std::string& s, std::string_view needle) { return s.find(needle) != std::string::npos; }

// First JSON string literal following `after` in a script expression.
std::string quoted_after(const std::string& expr, std::string_view after) {
    auto at = expr.find(after);
    if (at == std::string::npos) return {};
    auto start = expr.find('"', at);
    if (start == std::string::npos) return {};
    std::size_t end = start + 1;
    while (end < expr.size() && expr[end] != '"') end += expr[end] == '\\' ? 2 : 1;
    return Json::parse(expr.substr(start, end - start + 1)).get<std::string>();
}

Json value_result(Json v) { return {{"result", {{"type", "object"}, {"value", std::move(v)}}}}; }

}  // namespace

FakeBrowser::FakeBrowser(std::map<std::string, std::string> pages)
    : pages_(std::move(pages)), ws_(std::make_unique<Ws>()), http_(std::make_unique<httplib::Server>()) {
    current_ = "about:blank";
    history_.push_back(current_);
    http_->Get("/json/list", [this](const httplib::Request&, httplib::Response& res) {
        Json list = Json::array();
        list.push_back({{"id", "T1"}, {"type", "page"}, {"url", current_url()}, {"webSocketDebuggerUrl", ws_url()}});
        res.set_content(list.dump(), "application/json");
    });
    http_port_ = http_->bind_to_any_port("127.0.0.1");
    http_thread_ = std::thread([this] { http_->listen_after_bind(); });
    ws_thread_ = std::thread([this] { serve_ws(); });
    http_->wait_until_ready();
}

FakeBrowser::~FakeBrowser() {
    http_->stop();
    ws_->stopping = true;
    try {
        asio::io_context ioc;
        tcp::socket poke(ioc);
        poke.connect(ws_->acceptor.local_endpoint());
    } catch (const std::exception&) {
    }
    if (ws_thread_.joinable()) ws_thread_.join();
    if (http_thread_.joinable()) http_thread_.join();
}

std::string FakeBrowser::ws_url() const {
    return "ws://127.0.0.1:" + std::to_string(ws_->acceptor.local_endpoint().port()) + "/devtools/page/T1";
}

void FakeBrowser::route_click(const std::string& selector, const std::string& url) {
    std::lock_guard lock(mu_);
    click_routes_[selector] = url;
}

std::vector<std::string> FakeBrowser::methods() const {
    std::lock_guard lock(mu_);
    return methods_;
}

std::vector<std::string> FakeBrowser::typed() const {
    std::lock_guard lock(mu_);
    return typed_;
}

std::string FakeBrowser::current_url() const {
    std::lock_guard lock(mu_);
    return current_;
}

int FakeBrowser::scroll() const {
    std::lock_guard lock(mu_);
    return scroll_;
}

void FakeBrowser::serve_ws() {
    while (!ws_->stopping) {
        tcp::socket socket(ws_->ioc);
        boost::system::error_code ec;
        ws_->acceptor.accept(socket, ec);
        if (ec || ws_->stopping) return;
        try {
            websocket::stream<tcp::socket> ws(std::move(socket));
            ws.accept();
            ws.text(true);
            for (;;) {
                beast::flat_buffer buffer;
                ws.read(buffer);
                std::vector<std::string> events;
                auto reply = handle(beast::buffers_to_string(buffer.data()), events);
                for (const auto& e : events) ws.write(asio::buffer(e));
                ws.write(asio::buffer(reply));
            }
        } catch (const std::exception&) {
            // Client went away; wait for the next connection.
        }
    }
}

std::string FakeBrowser::handle(const std::string& message, std::vector<std::string>& events) {
    auto msg = Json::parse(message);
    auto id = msg.at("id");
    auto method = msg.at("method").get<std::string>();
    auto params = msg.value("params", Json::object());
    std::lock_guard lock(mu_);
    methods_.push_back(method);

    auto go = [&](const std::string& url) {
        history_.resize(history_index_ + 1);
        history_.push_back(url);
        history_index_ = history_.size() - 1;
        current_ = url;
        scroll_ = 0;
        events.push_back(Json{{"method", "Page.frameNavigated"}, {"params", {{"url", url}}}}.dump());
    };

    Json result = Json::object();
    if (method == "Page.enable" || method == "Runtime.enable") {
    } else if (method == "Page.navigate") {
        auto url = params.at("url").get<std::string>();
        if (!pages_.count(url)) {
            result = {{"frameId", "F1"}, {"errorText", "net::ERR_NAME_NOT_RESOLVED"}};
        } else {
            go(url);
            result = {{"frameId", "F1"}};
        }
    } else if (method == "Runtime.evaluate") {
        auto expr = params.at("expression").get<std::string>();
        if (expr == "document.readyState") {
            result = value_result("complete");
        } else if (expr == "location.href") {
            result = value_result(current_);
        } else if (expr == "Math.round(window.scrollY)") {
            result = value_result(scroll_);
        } else if (expr == "document.documentElement.outerHTML") {
            result = pages_.count(current_) ? value_result(pages_.at(current_)) : value_result(nullptr);
        } else if (contains(expr, ").map(s =>")) {
            auto selectors = Json::parse(expr.substr(1, expr.find(").map(") - 1));
            Json boxes = Json::array();
            for (std::size_t i = 0; i < selectors.size(); ++i) boxes.push_back({0, 20.0 * static_cast<double>(i), 100, 20});
            result = value_result(boxes);
        } else if (contains(expr, "scrollIntoView")) {
            last_selector_ = quoted_after(expr, "querySelector(");
            result = value_result({50, 10});
        } else if (contains(expr, "window.scrollBy(0, ")) {
            auto at = expr.find("window.scrollBy(0, ") + 19;
            scroll_ = std::max(0, scroll_ + std::stoi(expr.substr(at)));
            result = value_result(scroll_);
        } else if (contains(expr, "e.options")) {
            typed_.push_back("select:" + quoted_after(expr, "const want = "));
            result = value_result(true);
        } else if (contains(expr, "e.focus()")) {
            result = value_result(true);
        } else {
            result = {{"result", {{"type", "undefined"}}},
                      {"exceptionDetails", {{"text", "Uncaught ReferenceError"}}}};
        }
    } else if (method == "Input.dispatchMouseEvent") {
        if (params.value("type", "") == "mouseReleased") {
            auto it = click_routes_.find(last_selector_);
            if (it != click_routes_.end()) go(it->second);
        }
    } else if (method == "Input.insertText") {
        typed_.push_back(params.at("text").get<std::string>());
    } else if (method == "Target.getTargets") {
        result = {{"targetInfos", Json::array({{{"targetId", "T1"}, {"type", "page"}, {"url", current_}, {"title", "Fake"}},
                                               {{"targetId", "W1"}, {"type", "service_worker"}, {"url", "sw.js"}}})}};
    } else if (method == "Page.captureScreenshot") {
        result = {{"data", "iVBORw0KGgo="}};
    } else if (method == "Page.getNavigationHistory") {
        Json entries = Json::array();
        for (std::size_t i = 0; i < history_.size(); ++i) entries.push_back({{"id", 100 + i}, {"url", history_[i]}});
        result = {{"currentIndex", history_index_}, {"entries", entries}};
    } else if (method == "Page.navigateToHistoryEntry") {
        auto idx = params.at("entryId").get<std::size_t>() - 100;
        history_index_ = idx;
        current_ = history_[idx];
        scroll_ = 0;
    } else {
        return Json{{"id", id}, {"error", {{"code", -32601}, {"message", "'" + method + "' wasn't found"}}}}.dump();
    }
    return Json{{"id", id}, {"result", result}}.dump();
}

}  // namespace uxsim::testkit
