#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace riskmin {

// Splits [0, n_items) into contiguous blocks, one per worker, and runs
// body(begin, end) on each.  The partition depends only on (n_items,
// n_threads), and callers perform all reductions serially in index order, so
// results are bitwise identical for every thread count.
inline void parallel_for(int n_items, int n_threads,
                         const std::function<void(int, int)>& body) {
    if (n_items <= 0) return;
    if (n_threads <= 1 || n_items == 1) {
        body(0, n_items);
        return;
    }
    const int workers = std::min(n_threads, n_items);
    const int block = (n_items + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int begin = w * block;
        const int end = std::min(begin + block, n_items);
        if (begin >= end) break;
        pool.emplace_back(body, begin, end);
    }
    for (auto& t : pool) t.join();
}

}  // namespace riskmin
