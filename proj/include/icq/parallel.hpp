#pragma once

#include <cstddef>
#include <functional>

namespace icq {

// Worker count: min(hardware_concurrency, ICQ_THREADS) with a floor of 1.
// ICQ_THREADS=1 forces serial execution.
unsigned worker_count();

// Runs fn(begin, end) over contiguous chunks of [0, n) on worker_count()
// threads. Chunks are assigned deterministically; results must be written to
// disjoint slots so output is identical regardless of thread count.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

} // namespace icq
