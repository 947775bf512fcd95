#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace somp {

/// Dot product with pairwise (cascade) summation. The result depends only on
/// the inputs, never on how callers split work across threads.
double pairwise_dot(std::span<const double> a, std::span<const double> b);

inline double pairwise_sum_squares(std::span<const double> a) { return pairwise_dot(a, a); }

/// Worker count for "auto" (0): the hardware concurrency, at least 1.
std::size_t resolve_threads(std::size_t requested);

/**
 * Runs fn(begin, end) over contiguous chunks of [0, count), using up to
 * `threads` workers. Chunks never get smaller than `min_chunk` items. The
 * first exception thrown by any chunk is rethrown after all workers join.
 */
template <class Fn>
void parallel_chunks(std::size_t count, std::size_t threads, std::size_t min_chunk, Fn&& fn)
{
    if (count == 0) return;
    min_chunk = std::max<std::size_t>(min_chunk, 1);
    std::size_t workers = std::min(std::max<std::size_t>(threads, 1), (count + min_chunk - 1) / min_chunk);
    if (workers <= 1) {
        fn(std::size_t{0}, count);
        return;
    }
    const std::size_t base = count / workers;
    const std::size_t extra = count % workers;
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::size_t begin = 0;
    std::vector<std::pair<std::size_t, std::size_t>> ranges(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        ranges[w] = {begin, begin + len};
        begin += len;
    }
    auto run = [&](std::size_t w) {
        try {
            fn(ranges[w].first, ranges[w].second);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace somp
