#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace perclab {

/// Runs fn(i) for i in [0, count) on a worker pool (workers == 0 means
/// hardware concurrency). Each index must write only to its own slot in
/// caller-owned storage; reduction order is then the caller's, so results do
/// not depend on scheduling.
inline void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& fn) {
    if (count <= 0) return;
    if (workers == 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers == 1 || count == 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int spawn = static_cast<int>(std::min<std::int64_t>(workers, count));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int w = 0; w < spawn; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
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

} // namespace perclab
