#pragma once

// Index-space work sharing for embarrassingly parallel loops.  Results must
// be written to per-index slots so that the merge order is the index order
// and output does not depend on the thread count.

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace egc {

/// Run body(i) for i in [0, n).  With n_threads <= 1 the loop is serial.
/// The body must not throw; capture failures in the per-index slot instead.
inline void parallel_for(std::size_t n, std::size_t n_threads,
                         const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    if (n_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const std::size_t workers = n_threads < n ? n_threads : n;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&next, n, &body] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace egc
