#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qstar {

/// Worker count for `requested` threads; 0 means one per hardware core.
inline unsigned resolve_threads(unsigned requested) {
    if (requested == 0) {
        requested = std::max(1u, std::thread::hardware_concurrency());
    }
    return requested;
}

/// Calls body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; the first exception thrown by a worker is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(count);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace qstar
