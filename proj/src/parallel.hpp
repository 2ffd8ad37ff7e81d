#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mecdelay::detail {

inline int worker_count(int requested, std::size_t jobs) {
    int n = requested > 0 ? requested : int(std::max(1u, std::thread::hardware_concurrency()));
    return int(std::min<std::size_t>(std::size_t(n), std::max<std::size_t>(jobs, 1)));
}

/// Runs f(i) for i in [0, n) on a few workers. Each index runs exactly once;
/// callers write results into slot i, so the output order never depends on
/// scheduling. The first exception is rethrown after all workers stop.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& f) {
    const int workers = worker_count(threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(std::size_t(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                    try {
                        f(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace mecdelay::detail
