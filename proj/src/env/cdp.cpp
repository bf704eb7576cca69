// SPDX-License-Identifier: Apache-2.0

#include "uxsim/env/cdp.hpp"

#include <openssl/evp.h>
#include <sys/socket.h>
#include <sys/time.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>
#include <thread>

#include "uxsim/common/error.hpp"
#include "uxsim/common/text.hpp"

namespace uxsim::env {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

namespace {

struct WsUrl {
    std::string host;
    std::string port;
    std::string target;
};

WsUrl parse_ws_url(const std::string& url) {
    if (!text::starts_with(url, "ws://")) throw EnvironmentError("unsupported debugger url '" + url + "'");
    auto rest = url.substr(5);
    auto slash = rest.find('/');
    auto authority = rest.substr(0, slash);
    WsUrl out;
    out.target = slash == std::string::npos ? "/" : rest.substr(slash);
    auto colon = authority.rfind(':');
    out.host = authority.substr(0, colon);
    out.port = colon == std::string::npos ? "80" : authority.substr(colon + 1);
    return out;
}

// Serializes a string as a JavaScript string literal.
std::string js_string(const std::string& s) { return Json(s).dump(); }

constexpr const char* kOuterHtml = "document.documentElement.outerHTML";
constexpr const char* kReadyState = "document.readyState";
constexpr const char* kLocation = "location.href";
constexpr const char* kScrollY = "Math.round(window.scrollY)";

}  // namespace

std::string base64_decode(std::string_view encoded) {
    std::string clean;
    for (char c : encoded) {
        if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
    }
    if (clean.size() % 4 != 0) throw EnvironmentError("malformed base64 payload");
    std::string out(clean.size() / 4 * 3, '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
    if (n < 0) throw EnvironmentError("malformed base64 payload");
    std::size_t pad = 0;
    if (!clean.empty() && clean.back() == '=') ++pad;
    if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

std::string url_origin(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) return {};
    auto host_end = url.find_first_of("/?#", scheme_end + 3);
    return text::to_lower(url.substr(0, host_end == std::string_view::npos ? url.size() : host_end));
}

std::vector<Json> list_targets(const CdpEndpoint& endpoint) {
    httplib::Client cli(endpoint.host, endpoint.port);
    cli.set_connection_timeout(5);
    auto res = cli.Get("/json/list");
    if (!res) throw EnvironmentError("debugger endpoint unreachable at " + endpoint.host + ":" + std::to_string(endpoint.port));
    if (res->status != 200) throw EnvironmentError("debugger endpoint returned HTTP " + std::to_string(res->status));
    auto j = parse_json(res->body, "/json/list");
    if (!j.is_array()) throw EnvironmentError("/json/list did not return an array");
    std::vector<Json> out;
    for (auto& t : j) out.push_back(t);
    return out;
}

struct CdpClient::Impl {
    asio::io_context ioc;
    websocket::stream<tcp::socket> ws{ioc};
};

CdpClient::CdpClient(const std::string& ws_url, std::chrono::milliseconds timeout) : impl_(std::make_unique<Impl>()) {
    auto url = parse_ws_url(ws_url);
    try {
        tcp::resolver resolver(impl_->ioc);
        auto results = resolver.resolve(url.host, url.port);
        asio::connect(impl_->ws.next_layer(), results.begin(), results.end());
        timeval tv{};
        tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
        tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
        auto fd = impl_->ws.next_layer().native_handle();
        ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        impl_->ws.handshake(url.host + ":" + url.port, url.target);
        impl_->ws.text(true);
    } catch (const boost::system::system_error& e) {
        throw EnvironmentError("cannot connect to " + ws_url + ": " + e.code().message());
    }
}

CdpClient::~CdpClient() {
    boost::system::error_code ec;
    impl_->ws.close(websocket::close_code::normal, ec);
}

Json CdpClient::read_message() {
    beast::flat_buffer buffer;
    try {
        impl_->ws.read(buffer);
    } catch (const boost::system::system_error& e) {
        throw EnvironmentError("debugger connection lost: " + e.code().message());
    }
    return parse_json(beast::buffers_to_string(buffer.data()), "debugger message");
}

Json CdpClient::call(const std::string& method, Json params) {
    long id = next_id_++;
    Json msg;
    msg["id"] = id;
    msg["method"] = method;
    msg["params"] = std::move(params);
    try {
        impl_->ws.write(asio::buffer(msg.dump()));
    } catch (const boost::system::system_error& e) {
        throw EnvironmentError("debugger write failed for " + method + ": " + e.code().message());
    }
    for (;;) {
        auto reply = read_message();
        if (!reply.contains("id")) {
            events_.push_back(std::move(reply));
            continue;
        }
        if (reply.at("id").get<long>() != id) continue;
        if (reply.contains("error")) {
            throw EnvironmentError(method + ": " + reply.at("error").value("message", std::string("protocol error")));
        }
        return reply.value("result", Json::object());
    }
}

Json CdpClient::wait_event(const std::string& method) {
    for (auto it = events_.begin(); it != events_.end(); ++it) {
        if (it->value("method", "") == method) {
            auto params = it->value("params", Json::object());
            events_.erase(it);
            return params;
        }
    }
    for (;;) {
        auto msg = read_message();
        if (msg.value("method", "") == method) return msg.value("params", Json::object());
        if (!msg.contains("id")) events_.push_back(std::move(msg));
    }
}

std::vector<Json> CdpClient::drain_events() {
    std::vector<Json> out(events_.begin(), events_.end());
    events_.clear();
    return out;
}

namespace {

std::unique_ptr<CdpClient> attach(const CdpEndpoint& endpoint) {
    for (const auto& t : list_targets(endpoint)) {
        if (t.value("type", "") == "page" && t.contains("webSocketDebuggerUrl")) {
            return std::make_unique<CdpClient>(t.at("webSocketDebuggerUrl").get<std::string>());
        }
    }
    throw EnvironmentError("no page target to attach to");
}

}  // namespace

CdpEnvironment::CdpEnvironment(CdpOptions options) : CdpEnvironment(options, attach(options.endpoint)) {}

CdpEnvironment::CdpEnvironment(CdpOptions options, std::unique_ptr<CdpClient> client)
    : options_(std::move(options)), client_(std::move(client)) {
    options_.site_origin = url_origin(options_.site_origin);
    client_->call("Page.enable");
    client_->call("Runtime.enable");
}

Json CdpEnvironment::evaluate(const std::string& expression) {
    auto res = client_->call("Runtime.evaluate", {{"expression", expression}, {"returnByValue", true}});
    if (res.contains("exceptionDetails")) {
        throw EnvironmentError("script failed: " + res.at("exceptionDetails").value("text", std::string("exception")));
    }
    return res.value("result", Json::object()).value("value", Json());
}

void CdpEnvironment::wait_for_load() {
    auto deadline = std::chrono::steady_clock::now() + options_.load_timeout;
    while (evaluate(kReadyState) != "complete") {
        if (std::chrono::steady_clock::now() > deadline) throw EnvironmentError("page load timed out: " + url_);
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    refresh_url();
}

void CdpEnvironment::refresh_url() {
    auto href = evaluate(kLocation);
    if (href.is_string()) url_ = href.get<std::string>();
    last_state_.reset();
}

void CdpEnvironment::navigate(const std::string& url) {
    auto res = client_->call("Page.navigate", {{"url", url}});
    if (auto err = res.value("errorText", std::string{}); !err.empty()) {
        throw EnvironmentError("page load failure: " + url + " (" + err + ")");
    }
    wait_for_load();
}

void CdpEnvironment::open(const std::string& url) { navigate(url); }

bool CdpEnvironment::off_site() const {
    return !options_.site_origin.empty() && url_origin(url_) != options_.site_origin;
}

std::string CdpEnvironment::current_html() {
    auto html = evaluate(kOuterHtml);
    if (!html.is_string()) throw EnvironmentError("page has no document: " + url_);
    return html.get<std::string>();
}

PageState CdpEnvironment::observe() {
    refresh_url();
    auto scroll = evaluate(kScrollY);
    auto state = extract_page_state(current_html(), url_, scroll.is_number() ? scroll.get<int>() : 0);

    Json selectors = Json::array();
    for (const auto& e : state.elements) selectors.push_back(e.selector);
    auto boxes = evaluate("(" + selectors.dump() +
                          ").map(s => { const e = document.querySelector(s); if (!e) return null;"
                          " const r = e.getBoundingClientRect(); return [r.x, r.y, r.width, r.height]; })");
    if (boxes.is_array() && boxes.size() == state.elements.size()) {
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const auto& b = boxes[i];
            if (b.is_array() && b.size() == 4) {
                state.elements[i].bbox = BoundingBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                                                     b[3].get<double>()};
            }
        }
    }

    auto targets = client_->call("Target.getTargets");
    state.tabs.clear();
    for (const auto& t : targets.value("targetInfos", Json::array())) {
        if (t.value("type", "") != "page") continue;
        state.tabs.push_back({t.value("targetId", ""), t.value("url", ""), t.value("title", "")});
    }
    last_state_ = state;
    return state;
}

const ElementInfo& CdpEnvironment::element_for(const AgentAction& action) const {
    const ElementInfo* el = last_state_ ? last_state_->element(action.target_index.value_or(0)) : nullptr;
    if (!el) throw ActionError("unknown element index " + std::to_string(action.target_index.value_or(0)));
    return *el;
}

std::string CdpEnvironment::execute(const AgentAction& action) {
    validate(action);
    switch (action.kind) {
        case ActionKind::click: {
            const auto& el = element_for(action);
            auto center = evaluate("(() => { const e = document.querySelector(" + js_string(el.selector) +
                                   "); if (!e) return null; e.scrollIntoView({block: 'center'});"
                                   " const r = e.getBoundingClientRect(); return [r.x + r.width / 2, r.y + r.height / 2]; })()");
            if (!center.is_array()) throw ActionError("stale element index " + std::to_string(*action.target_index));
            double x = center[0].get<double>(), y = center[1].get<double>();
            client_->call("Input.dispatchMouseEvent", {{"type", "mouseMoved"}, {"x", x}, {"y", y}});
            for (const char* type : {"mousePressed", "mouseReleased"}) {
                client_->call("Input.dispatchMouseEvent",
                              {{"type", type}, {"x", x}, {"y", y}, {"button", "left"}, {"clickCount", 1}});
            }
            auto before = url_;
            wait_for_load();
            auto label = el.text.empty() ? "" : " \"" + el.text + "\"";
            if (url_ != before) return "clicked <" + el.tag + ">" + label + "; navigated to " + url_;
            return "clicked <" + el.tag + ">" + label;
        }
        case ActionKind::type: {
            const auto& el = element_for(action);
            if (el.tag == "select") {
                auto ok = evaluate("(() => { const e = document.querySelector(" + js_string(el.selector) +
                                   "); if (!e) return false; const want = " + js_string(*action.payload) +
                                   ".toLowerCase(); for (const o of e.options) { if (o.text.trim().toLowerCase() === want"
                                   " || o.value.toLowerCase() === want) { e.value = o.value;"
                                   " e.dispatchEvent(new Event('change', {bubbles: true})); return true; } } return false; })()");
                if (ok != true) throw ActionError("no option \"" + *action.payload + "\" in <select>");
                return "selected \"" + *action.payload + "\"";
            }
            auto focused = evaluate("(() => { const e = document.querySelector(" + js_string(el.selector) +
                                    "); if (!e) return false; e.focus(); if ('value' in e) e.value = ''; return true; })()");
            if (focused != true) throw ActionError("stale element index " + std::to_string(*action.target_index));
            client_->call("Input.insertText", {{"text", *action.payload}});
            last_state_.reset();
            return "typed \"" + *action.payload + "\" into <" + el.tag + ">";
        }
        case ActionKind::scroll: {
            int delta = scroll_delta(action);
            auto y = evaluate("(() => { window.scrollBy(0, " + std::to_string(delta) + "); return " + kScrollY + "; })()");
            last_state_.reset();
            return "scrolled to offset " + std::to_string(y.is_number() ? y.get<int>() : 0);
        }
        case ActionKind::navigate: {
            auto target = text::trim(*action.payload);
            if (!is_absolute_url(target)) {
                auto origin = url_origin(url_);
                auto path = url_.substr(std::min(origin.size(), url_.size()));
                target = origin + resolve_site_path(path.empty() ? "/" : path, target);
            }
            try {
                navigate(target);
            } catch (const EnvironmentError& e) {
                throw ActionError(e.what());
            }
            return "navigated to " + url_;
        }
        case ActionKind::go_back: {
            auto history = client_->call("Page.getNavigationHistory");
            int current = history.value("currentIndex", 0);
            const auto& entries = history.value("entries", Json::array());
            if (current <= 0 || static_cast<std::size_t>(current) > entries.size()) throw ActionError("no history");
            client_->call("Page.navigateToHistoryEntry", {{"entryId", entries[static_cast<std::size_t>(current - 1)].at("id")}});
            wait_for_load();
            return "went back to " + url_;
        }
        case ActionKind::done:
            return *action.success ? "finished: goal reported achieved" : "finished: goal reported not achieved";
    }
    throw ActionError("unsupported action");
}

std::optional<std::string> CdpEnvironment::screenshot() {
    if (!options_.capture_screenshots) return std::nullopt;
    auto res = client_->call("Page.captureScreenshot", {{"format", "png"}});
    return base64_decode(res.value("data", std::string{}));
}

}  // namespace uxsim::env
