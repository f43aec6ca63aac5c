#pragma once

// Deterministic task fan-out: task i derives its own random stream from the
// master seed, writes into slot i, and the caller aggregates slots in index
// order, so results are identical for any worker count.

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace rwde {

template <class T, class Fn>
std::vector<T> run_indexed(std::uint64_t n_tasks, int workers, Fn&& fn) {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    std::vector<T> results(n_tasks);
    if (n_tasks == 0) return results;
    if (workers == 1) {
        for (std::uint64_t i = 0; i < n_tasks; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        try {
            while (true) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= n_tasks) return;
                results[i] = fn(i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return results;
}

}  // namespace rwde
