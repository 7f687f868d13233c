#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace efs {

// Runs fn(0..n-1) on up to `jobs` threads. Work items must write only to
// their own output slots; results are then independent of the job count.
// The exception of the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn)
{
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex guard;
    std::size_t failed_index = n;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace efs
