#pragma once

#include <cstddef>
#include <functional>

namespace oblique {

/// Worker count: OBLIQUE_WORKERS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls body(k) for k in [begin, end), split into contiguous chunks across
/// worker threads. Blocks until all chunks finish; rethrows the first
/// exception raised by any chunk.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace oblique
