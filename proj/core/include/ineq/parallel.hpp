#pragma once

#include <cstddef>
#include <functional>

namespace ineq {

/// Worker count from INEQ_NUM_THREADS, else hardware concurrency (at least 1).
unsigned default_worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// executed exactly once; results must be written by index so that the outcome
/// does not depend on scheduling. The first exception thrown by any body is
/// rethrown after all workers have joined.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace ineq
