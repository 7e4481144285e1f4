#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace dqlg {

/// Worker count honoring DQLG_THREADS (0 or unset = hardware concurrency).
inline unsigned thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("DQLG_THREADS");
    if (env == nullptr || *env == '\0') return hw;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || v < 0) return hw;
    return v == 0 ? hw : static_cast<unsigned>(v);
}

/// Runs fn(i) for i in [0, n) on contiguous blocks. fn must only write to
/// slots owned by index i; the result is then independent of scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1 || n < 256) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    std::size_t block = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t lo = w * block;
        std::size_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

/// Pairwise (tree) summation in a fixed order; bit-reproducible for a given input.
template <class T>
T pairwise_sum(std::span<const T> values) {
    if (values.empty()) return T{};
    if (values.size() <= 8) {
        T acc = values[0];
        for (std::size_t i = 1; i < values.size(); ++i) acc += values[i];
        return acc;
    }
    std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

template <class T>
T pairwise_sum(const std::vector<T>& values) {
    return pairwise_sum(std::span<const T>(values));
}

} // namespace dqlg
