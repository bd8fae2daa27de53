#pragma once

#include <functional>

namespace tdc {

// Worker count from TDC_WORKERS, else the hardware concurrency.
int worker_count();

// Runs fn(k) for k in [0, n) on worker threads. The first exception thrown
// by any task is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace tdc
