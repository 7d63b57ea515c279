#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace relchange {

/// Worker count: RELCHANGE_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks must
/// write only to their own output slot; the caller reduces in index order.
/// The first exception thrown by a task is rethrown after all workers join.
/// Calls made from inside a worker run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task,
                  std::size_t threads = thread_count());

/// Fixed-shape pairwise summation; the result depends only on the input
/// order, never on how the terms were produced.
double pairwise_sum(std::span<const double> terms) noexcept;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of the `stream`-th independent substream of `master`. Pure function
/// of its arguments, so replications can run in any order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

}  // namespace relchange
