// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace annealab {

/// Worker count: hardware concurrency capped by the ANNEAL_LAB_THREADS
/// environment variable (values < 1 or unparsable fall back to 1).
inline int thread_budget() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("ANNEAL_LAB_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) hw = std::min(hw, cap);
        } catch (...) {
            // ignore malformed values
        }
    }
    return hw;
}

/// Static index striping over a worker pool: worker k handles indices
/// k, k + p, k + 2p, ... so the partition (and any writes into
/// caller-preallocated slots) is deterministic regardless of completion
/// order. threads == 0 selects thread_budget().
template <typename F>
void parallel_for_indexed(std::size_t n, int threads, F&& body) {
    if (n == 0) return;
    int pool = threads == 0 ? thread_budget() : std::max(threads, 1);
    pool = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(pool), n));
    if (pool <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(pool));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(pool));
    for (int k = 0; k < pool; ++k) {
        workers.emplace_back([&, k] {
            try {
                for (std::size_t i = static_cast<std::size_t>(k); i < n; i += static_cast<std::size_t>(pool))
                    body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(k)] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace annealab
