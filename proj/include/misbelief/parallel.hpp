#pragma once

#include <cstddef>
#include <functional>

namespace misbelief {

/// Worker count: MISBELIEF_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Runs body(0) .. body(n-1) on up to worker_count() threads. Each index runs
/// exactly once; callers write results by index so output order never depends
/// on scheduling. The exception from the lowest failing index is rethrown
/// after every index has run.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace misbelief
