#pragma once

#include <functional>

namespace squirrels {

/// Worker cap: SQUIRRELS_THREADS if set to a positive integer, else hardware parallelism.
int thread_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers (<= 0: thread_count()).
/// The first exception thrown by any job is rethrown after all workers join.
void parallel_for(int n, const std::function<void(int)>& fn, int threads = 0);

}  // namespace squirrels
