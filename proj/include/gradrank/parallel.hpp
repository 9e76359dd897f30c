#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace gradrank {

/// Worker count: hardware concurrency capped by the GRADRANK_THREADS
/// environment variable (minimum 1).
inline std::size_t thread_cap() {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("GRADRANK_THREADS")) {
        const long cap = std::atol(env);
        if (cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
    }
    return n;
}

/// Runs fn(i) for i in [0, count) across worker threads. fn must not throw;
/// callers collect per-item failures into their own slots instead.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(thread_cap(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace gradrank
