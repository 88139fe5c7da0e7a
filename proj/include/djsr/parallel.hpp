#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace djsr {

// Thread count from DJSR_THREADS, else hardware concurrency (at least 1).
int default_thread_count();

// Runs body(i) for i in [0, n) over `threads` workers in contiguous static
// chunks. Callers write into per-index slots, so results never depend on the
// thread count.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = n * w / workers;
            const std::size_t end = n * (w + 1) / workers;
            pool.emplace_back([&, begin, end, w] {
                try {
                    for (std::size_t i = begin; i < end; ++i) body(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace djsr
