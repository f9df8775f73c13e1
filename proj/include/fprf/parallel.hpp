#pragma once

#include <cstddef>
#include <functional>

namespace fprf {

// Worker count used by parallel_for. Defaults to FPRF_THREADS when set,
// otherwise 1.
int num_threads();
void set_num_threads(int n);

// Runs fn(i) for i in [0, n). Indices are split into contiguous static
// ranges; fn must only write to state owned by index i, so results do not
// depend on the worker count.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace fprf
