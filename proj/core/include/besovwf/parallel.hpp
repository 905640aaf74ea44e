#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace besovwf {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items are
/// claimed dynamically, so callers must write results by index to stay
/// deterministic. The first exception thrown by any item is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1u), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace besovwf
