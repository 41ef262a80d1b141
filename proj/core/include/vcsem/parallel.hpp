#pragma once

#include <cstddef>
#include <functional>

namespace vcsem {

/// Caps the worker count used by row-parallel loops. 1 runs everything inline.
void set_thread_count(int threads);
int thread_count() noexcept;

/// Rows are reduced in fixed chunks of this size regardless of thread count,
/// so sums are bit-identical for any --threads value.
inline constexpr std::size_t kReductionChunk = 256;

/// Sums chunk_sum(begin, end) over fixed chunks of [0, n), adding the partial
/// sums left to right.
double deterministic_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& chunk_sum);

/// Runs body(begin, end) over fixed chunks of [0, n); chunks must touch disjoint data.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace vcsem
