#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace mlpmc {

// Deterministic block-parallel map. Work is cut into fixed-size blocks that
// depend only on (count, block_size); workers grab blocks through an atomic
// cursor, and results land in block order. Combining partial results in
// block order afterwards makes every reduction independent of the worker
// count and of scheduling, which is what keeps estimates bit-identical
// across --threads settings.
template <typename Result, typename BlockFn>
std::vector<Result> parallel_blocks(std::size_t count, std::size_t block_size, int width,
                                    BlockFn&& fn) {
    const std::size_t blocks = count == 0 ? 0 : (count + block_size - 1) / block_size;
    std::vector<Result> results(blocks);
    if (blocks == 0) return results;

    auto run_block = [&](std::size_t b) {
        const std::size_t begin = b * block_size;
        const std::size_t end = std::min(begin + block_size, count);
        results[b] = fn(begin, end);
    };

    if (width <= 1 || blocks == 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
        return results;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= blocks) return;
            run_block(b);
        }
    };
    const std::size_t nthreads =
        std::min<std::size_t>(static_cast<std::size_t>(width), blocks);
    std::vector<std::thread> pool;
    pool.reserve(nthreads - 1);
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return results;
}

int hardware_width();

}  // namespace mlpmc
