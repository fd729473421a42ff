#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace facet {

// Runs fn(i) for i in [0, count) across up to `threads` workers.  Each index
// is processed exactly once and results must be written to preallocated,
// index-owned slots; combined with a serial fold over those slots this keeps
// outputs identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    if (count == 0) return;
    if (threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            // Strided assignment: deterministic ownership of indices.
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline std::size_t default_thread_count() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

} // namespace facet
