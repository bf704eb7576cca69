// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uxsim/env/page_state.hpp"
#include "uxsim/html/dom.hpp"

namespace uxsim::env {

// One browsing session. Single-threaded: callers serialize observe/execute.
class Environment {
public:
    virtual ~Environment() = default;

    // Loads the start page; throws EnvironmentError on load failure.
    virtual void open(const std::string& url) = 0;
    virtual PageState observe() = 0;
    // Performs the action and returns a one-line outcome. Throws ActionError
    // for stale or unknown targets; the session is left unchanged.
    virtual std::string execute(const AgentAction& action) = 0;
    virtual std::string current_html() = 0;
    virtual std::string current_url() const = 0;
    // True while the current page lies outside the configured site.
    virtual bool off_site() const = 0;
    // PNG bytes when a renderer is available.
    virtual std::optional<std::string> screenshot() { return std::nullopt; }
};

// True for urls with a scheme or a protocol-relative prefix.
bool is_absolute_url(std::string_view url);

// Resolves `href` against a site-relative base path ("/dir/page.html").
// Dot segments are collapsed and clamped at the root; query and fragment
// are dropped.
std::string resolve_site_path(std::string_view base, std::string_view href);

// Optional url-path -> file overrides, read from navmap.json in the
// snapshot directory: {"version": "1.0", "routes": {"/": "index.html"}}.
struct NavMap {
    std::map<std::string, std::string> routes;

    static NavMap load(const std::filesystem::path& snapshot_dir);
    // File (relative to the snapshot directory) serving `path`.
    std::string file_for(const std::string& path) const;
};

// Deterministic environment over a directory of HTML snapshots. Urls are
// site-relative paths; anything absolute counts as leaving the site.
class OfflineEnvironment : public Environment {
public:
    explicit OfflineEnvironment(std::filesystem::path snapshot_dir);

    void open(const std::string& url) override;
    PageState observe() override;
    std::string execute(const AgentAction& action) override;
    std::string current_html() override;
    std::string current_url() const override { return page_.url; }
    bool off_site() const override { return page_.external; }

    int scroll_offset() const { return page_.scroll; }
    std::size_t history_depth() const { return history_.size(); }
    const NavMap& navmap() const { return navmap_; }

private:
    struct Page {
        std::string url;
        std::string source;
        html::NodePtr dom;
        bool dirty = false;  // form state changed since load
        bool external = false;
        int scroll = 0;
    };

    Page load(const std::string& url) const;
    std::string go_to(const std::string& url);
    html::Node* target(const AgentAction& action);
    std::string click(html::Node& el);
    std::string type_into(html::Node& el, const std::string& text);

    std::filesystem::path root_;
    NavMap navmap_;
    Page page_;
    std::vector<Page> history_;
};

}  // namespace uxsim::env
