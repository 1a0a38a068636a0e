#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qbm {

/// Number of workers used by default: the available hardware parallelism.
inline std::size_t default_workers()
{
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once; the first exception thrown (lowest index wins) is
/// rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t workers = default_workers())
{
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mtx;
    std::exception_ptr first;
    std::size_t first_index = n;

    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mtx);
                if (i < first_index) {
                    first_index = i;
                    first = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 0; w + 1 < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace qbm
