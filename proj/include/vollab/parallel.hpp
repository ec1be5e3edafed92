#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace vollab {

inline unsigned default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(block_index) for block_index in [0, n_blocks). Blocks are claimed
/// from a shared counter; callers get determinism by writing block results
/// into per-block slots and reducing in index order afterwards.
template <typename Fn>
void parallel_for_blocks(std::size_t n_blocks, unsigned n_threads, Fn&& fn) {
    if (n_blocks == 0) return;
    if (n_threads <= 1 || n_blocks == 1) {
        for (std::size_t i = 0; i < n_blocks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_blocks || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(n_threads, n_blocks));
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace vollab
