#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gsplit {

/// Number of worker threads to use: hardware concurrency, capped by the
/// GSPLIT_THREADS environment variable when set to a positive integer.
inline std::size_t worker_count() {
    std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("GSPLIT_THREADS")) {
        const long v = std::atol(cap);
        if (v > 0) n = std::min(n, static_cast<std::size_t>(v));
    }
    return n;
}

/// Run fn(i) for i in [0, n) across worker threads in contiguous chunks.
/// Each index is processed exactly once; callers own any reduction and must
/// keep it deterministic (write per-index results, then reduce sequentially).
/// The first worker exception is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(1, n));
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn, &failure, &failure_mutex] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace gsplit
