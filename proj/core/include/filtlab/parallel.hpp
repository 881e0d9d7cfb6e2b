#pragma once

#include <cstddef>
#include <functional>

namespace filtlab {

/// Worker count: FILTLAB_WORKERS env var if set, else hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n), partitioned over worker_count() threads.
/// fn must write only to per-index state; results are then independent of
/// the partitioning.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace filtlab
