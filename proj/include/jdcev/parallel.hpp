#pragma once

#include <cstddef>
#include <functional>

namespace jdcev {

/// Worker count used when a caller passes 0: hardware concurrency, at least 1.
unsigned default_workers() noexcept;

/// Runs body(begin, end) over a static partition of [0, n) into at most `workers`
/// contiguous chunks. The partition depends only on n and workers, so bodies that
/// write disjoint outputs give identical results for any worker count.
/// The first exception thrown by a chunk is rethrown after all chunks finish.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

} // namespace jdcev
