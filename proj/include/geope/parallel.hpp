#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace geope {

/// Worker count: GEOPE_THREADS caps internal parallelism, 0 or unset = auto.
inline unsigned thread_budget() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("GEOPE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v) < hw ? static_cast<unsigned>(v) : hw;
    }
    return hw;
}

/// Runs fn(i) for i in [0, count). Work items must be independent; outputs
/// must not depend on the split, so results match the serial order exactly.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = thread_budget();
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const unsigned n = workers < count ? workers : static_cast<unsigned>(count);
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += n) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace geope
