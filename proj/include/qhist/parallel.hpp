#pragma once

#include <cstddef>
#include <functional>

namespace qhist {

/// Worker count for parallel sweeps.  Defaults to $QHIST_THREADS, then to
/// the hardware concurrency.
int thread_count();
void set_thread_count(int threads);

/// Runs body(i) for i in [0, n) over contiguous static chunks.  Bodies must
/// only write to slots owned by their index; results are then independent
/// of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qhist
