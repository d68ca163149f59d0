#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace anchor {

// Runs fn(begin, end) over fixed-size chunks of [0, n) on up to num_threads
// workers. Chunk boundaries depend only on n and chunk_size, so callers that
// reduce per-chunk results in chunk order get the same answer for any thread
// count.
inline void parallel_for_chunks(
    std::size_t n, std::size_t num_threads, std::size_t chunk_size,
    const std::function<void(std::size_t chunk_index, std::size_t begin,
                             std::size_t end)>& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t num_chunks = (n + chunk_size - 1) / chunk_size;
    if (num_threads <= 1 || num_chunks == 1) {
        for (std::size_t c = 0; c < num_chunks; ++c) {
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        }
        return;
    }
    std::vector<std::thread> workers;
    const std::size_t t = std::min(num_threads, num_chunks);
    std::atomic<std::size_t> next{0};
    workers.reserve(t);
    for (std::size_t i = 0; i < t; ++i) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= num_chunks) break;
                fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
            }
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace anchor
