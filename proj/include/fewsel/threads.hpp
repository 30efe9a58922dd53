#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace fewsel {

// Worker count: explicit request > FEWSEL_THREADS > hardware concurrency.
int effective_threads(int requested);

// Runs fn(begin, end) over contiguous chunks of [0, n). Caller-provided fn
// must write only to per-index slots; all reductions happen afterwards in
// index order, so results are identical for every thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace fewsel
