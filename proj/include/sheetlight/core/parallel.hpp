#pragma once

#include <functional>

namespace sheetlight {

/// Worker count from SHEETLIGHT_WORKERS, else hardware concurrency (min 1).
int default_worker_count();

/// Runs `body(begin, end)` over contiguous chunks of [0, count) on up to
/// `workers` threads. Chunk boundaries depend only on `count` and `chunk`,
/// so any body that writes disjoint outputs per index yields identical
/// results for every worker count. Exceptions from the body are rethrown on the caller.
void parallel_for(int count, int workers, const std::function<void(int, int)>& body, int chunk = 16);

}  // namespace sheetlight
