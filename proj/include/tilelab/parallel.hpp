#pragma once

#include <cstdint>
#include <functional>

namespace tilelab {

// Worker count: TILELAB_THREADS when set (minimum 1), otherwise hardware
// concurrency.
int thread_budget();

// Static chunking over [0, n). Each index must write only its own slot so
// results are identical for any worker count; reductions happen afterwards
// in index order.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace tilelab
