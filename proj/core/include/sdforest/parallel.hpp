#pragma once

#include <cstddef>
#include <functional>

namespace sdf {

/// Worker count from SDFOREST_THREADS (unset or 0 means hardware concurrency).
int default_thread_count();

/// Resolves a requested count: values <= 0 fall back to default_thread_count().
int resolve_thread_count(int requested);

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count, never on scheduling.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace sdf
