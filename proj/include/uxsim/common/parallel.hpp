// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace uxsim {

// Calls fn(i) for every i in [0, n) on up to `workers` threads (the caller
// included). The first exception thrown by any call is rethrown after all
// workers finish.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex mu;
    auto run = [&] {
        for (auto i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::size_t extra = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < extra; ++t) threads.emplace_back(run);
    run();
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace uxsim
