// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "fake_cdp.hpp"
#include "support.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/env/cdp.hpp"

using namespace uxsim;
using env::ActionKind;
using env::AgentAction;

namespace {

const std::string kHome = "http://shop.test/index.html";
const std::string kShop = "http://shop.test/shop.html";

std::map<std::string, std::string> pages() {
    return {{kHome, testkit::load_fixture_text("fixtures/shop/index.html")},
            {kShop, testkit::load_fixture_text("fixtures/shop/shop.html")},
            {"http://other.test/", "<p>elsewhere</p>"}};
}

env::CdpOptions options_for(const testkit::FakeBrowser& b, bool screenshots = false) {
    env::CdpOptions o;
    o.endpoint = b.endpoint();
    o.site_origin = "http://shop.test/";
    o.capture_screenshots = screenshots;
    o.load_timeout = std::chrono::milliseconds(2000);
    return o;
}

AgentAction act(ActionKind kind, std::optional<int> target = std::nullopt, std::optional<std::string> payload = std::nullopt) {
    return {kind, target, std::move(payload), std::nullopt};
}

}  // namespace

TEST(Cdp, UrlOriginAndBase64) {
    EXPECT_EQ(env::url_origin("https://a.b:8080/x?y"), "https://a.b:8080");
    EXPECT_EQ(env::url_origin("/relative"), "");
    EXPECT_EQ(env::base64_decode("aGVsbG8="), "hello");
    EXPECT_EQ(env::base64_decode(""), "");
}

TEST(Cdp, ListTargetsReportsPages) {
    testkit::FakeBrowser browser(pages());
    auto targets = env::list_targets(browser.endpoint());
    ASSERT_EQ(targets.size(), 1u);
    EXPECT_EQ(targets[0].at("webSocketDebuggerUrl"), browser.ws_url());
}

TEST(Cdp, UnreachableEndpointIsEnvironmentError) {
    env::CdpEndpoint nowhere{"127.0.0.1", 1};
    EXPECT_THROW(env::list_targets(nowhere), EnvironmentError);
    env::CdpOptions o;
    o.endpoint = nowhere;
    EXPECT_THROW(env::CdpEnvironment{o}, EnvironmentError);
}

TEST(Cdp, ObserveExtractsStateBoxesAndTabs) {
    testkit::FakeBrowser browser(pages());
    env::CdpEnvironment e(options_for(browser));
    e.open(kHome);
    EXPECT_EQ(e.current_url(), kHome);
    auto s = e.observe();
    EXPECT_EQ(s.elements.size(), 10u);
    ASSERT_TRUE(s.elements[1].bbox.has_value());
    EXPECT_EQ(s.elements[1].bbox->y, 20.0);
    ASSERT_EQ(s.tabs.size(), 1u);  // service worker filtered out
    EXPECT_EQ(s.tabs[0].id, "T1");
    EXPECT_FALSE(e.off_site());
}

TEST(Cdp, ClickFollowsRouteAndGoBackReturns) {
    testkit::FakeBrowser browser(pages());
    env::CdpEnvironment e(options_for(browser));
    e.open(kHome);
    auto s = e.observe();
    browser.route_click(s.elements[1].selector, kShop);
    auto outcome = e.execute(act(ActionKind::click, 2));
    EXPECT_NE(outcome.find("navigated to " + kShop), std::string::npos);
    EXPECT_EQ(e.current_url(), kShop);
    EXPECT_THROW(e.execute(act(ActionKind::click, 2)), ActionError);  // state must be re-observed
    EXPECT_EQ(e.execute(act(ActionKind::go_back)), "went back to " + kHome);
    auto methods = browser.methods();
    EXPECT_EQ(std::count(methods.begin(), methods.end(), "Input.dispatchMouseEvent"), 3);
}

TEST(Cdp, TypeSelectAndScroll) {
    testkit::FakeBrowser browser(pages());
    env::CdpEnvironment e(options_for(browser));
    e.open(kShop);
    e.observe();
    EXPECT_EQ(e.execute(act(ActionKind::type, 5, std::string("linen"))), "typed \"linen\" into <input>");
    e.observe();
    EXPECT_EQ(e.execute(act(ActionKind::type, 7, std::string("Price: Low to High"))),
              "selected \"Price: Low to High\"");
    EXPECT_EQ(browser.typed(), (std::vector<std::string>{"linen", "select:Price: Low to High"}));
    EXPECT_EQ(e.execute(act(ActionKind::scroll, std::nullopt, std::string("400"))), "scrolled to offset 400");
    EXPECT_EQ(browser.scroll(), 400);
}

TEST(Cdp, NavigateResolvesRelativeAndDetectsOffSite) {
    testkit::FakeBrowser browser(pages());
    env::CdpEnvironment e(options_for(browser));
    e.open(kHome);
    EXPECT_EQ(e.execute(act(ActionKind::navigate, std::nullopt, std::string("shop.html"))), "navigated to " + kShop);
    EXPECT_THROW(e.execute(act(ActionKind::navigate, std::nullopt, std::string("/missing.html"))), ActionError);
    e.execute(act(ActionKind::navigate, std::nullopt, std::string("http://other.test/")));
    EXPECT_TRUE(e.off_site());
    EXPECT_THROW(e.open("http://nowhere.test/"), EnvironmentError);
}

TEST(Cdp, ScreenshotOnlyWhenEnabled) {
    testkit::FakeBrowser browser(pages());
    env::CdpEnvironment off(options_for(browser));
    EXPECT_FALSE(off.screenshot().has_value());
}

TEST(Cdp, ScreenshotDecodesPng) {
    testkit::FakeBrowser browser(pages());
    env::CdpEnvironment on(options_for(browser, true));
    auto png = on.screenshot();
    ASSERT_TRUE(png.has_value());
    EXPECT_EQ(png->substr(1, 3), "PNG");
}

TEST(Cdp, ProtocolErrorsCarryMethodName) {
    testkit::FakeBrowser browser(pages());
    env::CdpClient client(browser.ws_url(), std::chrono::milliseconds(2000));
    try {
        client.call("Bogus.method");
        FAIL();
    } catch (const EnvironmentError& e) {
        EXPECT_NE(std::string(e.what()).find("Bogus.method"), std::string::npos);
    }
    client.call("Page.navigate", {{"url", kHome}});
    auto ev = client.wait_event("Page.frameNavigated");
    EXPECT_EQ(ev.at("url"), kHome);
}
