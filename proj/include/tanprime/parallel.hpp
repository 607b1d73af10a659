#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tanprime {

/// Execution settings threaded through the heavy operations.  Work is always
/// split into the same fixed blocks; the thread count only decides who runs
/// them, so results never depend on it.
struct Exec {
    unsigned threads = 1;
};

/// Runs fn(block) for block in [0, n_blocks) on up to exec.threads threads.
/// The first exception thrown by any block is rethrown on the caller.
template <class Fn>
void parallel_for_blocks(std::size_t n_blocks, const Exec& exec, Fn&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(std::max<unsigned>(exec.threads, 1u), n_blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= n_blocks) return;
            try {
                fn(b);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n_blocks, std::memory_order_relaxed);
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
        worker();
    }
    if (first_error) std::rethrow_exception(first_error);
}

inline std::size_t block_count(std::size_t n, std::size_t block) { return (n + block - 1) / block; }

}  // namespace tanprime
