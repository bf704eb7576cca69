// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "uxsim/annotate/annotate.hpp"
#include "uxsim/llm/gateway.hpp"
#include "uxsim/store/store.hpp"

namespace httplib {
class Server;
}

namespace uxsim::store {

struct ServerOptions {
    // Gateway used for everything the service asks of a model.
    std::function<std::shared_ptr<llm::Gateway>(const persona::ExperimentConfig&)> make_gateway;
    std::function<agent::EnvironmentFactory(const persona::ExperimentConfig&)> make_environment = environment_factory;
    int pool = 1;
    annotate::AnnotationOptions annotation;
};

// HTTP status for an exception thrown by a handler.
int status_for(const std::exception& e);

// JSON/HTTP front end over a Store. Runs and annotation passes execute on
// background threads; everything else answers synchronously.
class Server {
public:
    Server(Store& store, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds to an ephemeral port and serves on a background thread.
    int start(const std::string& host = "127.0.0.1");
    // Blocks serving on `port`.
    bool listen(const std::string& host, int port);
    void stop();
    // Waits for background runs and annotation passes.
    void wait_for_jobs();

private:
    void routes();
    void spawn(std::function<void()> job);

    Store& store_;
    ServerOptions options_;
    std::unique_ptr<httplib::Server> http_;
    std::thread listener_;
    std::mutex jobs_mu_;
    std::vector<std::thread> jobs_;
};

}  // namespace uxsim::store
