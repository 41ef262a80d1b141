#include "vcsem/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <memory>
#include <mutex>
#include <vector>

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/partitioner.h>

namespace vcsem {
namespace {

std::atomic<int> g_threads{1};
std::mutex g_control_mutex;
std::unique_ptr<tbb::global_control> g_control;

std::size_t chunk_count(std::size_t n) { return (n + kReductionChunk - 1) / kReductionChunk; }

}  // namespace

void set_thread_count(int threads) {
    threads = std::max(1, threads);
    std::lock_guard lock(g_control_mutex);
    g_control.reset();
    if (threads > 1) {
        g_control = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                          static_cast<std::size_t>(threads));
    }
    g_threads.store(threads);
}

int thread_count() noexcept { return g_threads.load(); }

double deterministic_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& chunk_sum) {
    const std::size_t chunks = chunk_count(n);
    if (chunks == 0) return 0.0;
    std::vector<double> partial(chunks, 0.0);
    auto run = [&](std::size_t c) {
        const std::size_t begin = c * kReductionChunk;
        partial[c] = chunk_sum(begin, std::min(n, begin + kReductionChunk));
    };
    if (thread_count() > 1 && chunks > 1) {
        tbb::parallel_for(
            tbb::blocked_range<std::size_t>(0, chunks, 1),
            [&](const tbb::blocked_range<std::size_t>& range) {
                for (std::size_t c = range.begin(); c != range.end(); ++c) run(c);
            },
            tbb::simple_partitioner());
    } else {
        for (std::size_t c = 0; c < chunks; ++c) run(c);
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t chunks = chunk_count(n);
    auto run = [&](std::size_t c) {
        const std::size_t begin = c * kReductionChunk;
        body(begin, std::min(n, begin + kReductionChunk));
    };
    if (thread_count() > 1 && chunks > 1) {
        tbb::parallel_for(
            tbb::blocked_range<std::size_t>(0, chunks, 1),
            [&](const tbb::blocked_range<std::size_t>& range) {
                for (std::size_t c = range.begin(); c != range.end(); ++c) run(c);
            },
            tbb::simple_partitioner());
    } else {
        for (std::size_t c = 0; c < chunks; ++c) run(c);
    }
}

}  // namespace vcsem
