#pragma once

/// Deterministic data-parallel loop. Work items write into index-addressed
/// slots; any reduction happens afterwards in index order, so results are
/// byte-identical for every thread count.

#include <cstddef>
#include <thread>
#include <vector>

namespace k3glue {

inline int default_thread_count()
{
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body)
{
    if (n == 0) return;
    if (threads < 1) threads = 1;
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    if (t == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (std::size_t k = 0; k < t; ++k) {
        const std::size_t lo = k * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace k3glue
