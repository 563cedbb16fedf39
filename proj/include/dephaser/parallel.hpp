// parallel.hpp — Chunked parallel-for over independent indices
//
// Workers write results only through their own index, so the output is
// bit-identical for any thread count.

#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dephaser {

// Global worker count. 0 selects std::thread::hardware_concurrency().
inline int& thread_count() {
    static int count = 0;
    return count;
}

inline void set_thread_count(int count) { thread_count() = count < 0 ? 0 : count; }

inline int resolved_thread_count() {
    int count = thread_count();
    if (count == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        count = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return count;
}

// Runs body(i) for i in [0, n). Exceptions from workers are rethrown (first one wins).
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int workers = resolved_thread_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const std::size_t stride = static_cast<std::size_t>(workers);
    pool.reserve(stride);
    for (std::size_t w = 0; w < stride && w < n; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += stride) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace dephaser
