#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rfnet::util {

// Episode/fold parallelism cap: RF_NET_THREADS when set, else the hardware
// count. Work items must be independent; results go into per-index slots so
// output never depends on scheduling.
inline int thread_budget() {
    if (const char* env = std::getenv("RF_NET_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void parallel_for(int n, const std::function<void(int)>& fn, int max_threads = 0) {
    int threads = max_threads > 0 ? max_threads : thread_budget();
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace rfnet::util
