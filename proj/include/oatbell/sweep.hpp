#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace oatbell {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Run fn(i) for i in [0, n) on a worker pool; results land in task order, so
// downstream output is byte-identical regardless of thread count.
template <typename R>
std::vector<R> ordered_parallel_map(std::size_t n, int threads, const std::function<R(std::size_t)>& fn) {
    std::vector<R> results(n);
    int t = resolve_threads(threads);
    if (t <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) results[i] = fn(i);
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

}  // namespace oatbell
