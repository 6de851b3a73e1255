#pragma once

#include <functional>

namespace sirf {

// Worker count used by row-sliced kernels.  Resolution order: reference mode
// forces 1, then an explicit set_thread_count(), then the SIRF_THREADS
// environment variable, then 1.  Kernels only split disjoint output ranges,
// so results are identical for every thread count.
int thread_count();
void set_thread_count(int n);       // n <= 0 restores the default resolution
void set_reference_mode(bool on);
bool reference_mode();

// Runs fn(begin, end) over a partition of [0, n).  Runs inline when the
// resolved thread count is 1 or the range is small.
void parallel_for(int n, const std::function<void(int, int)>& fn);

}  // namespace sirf
