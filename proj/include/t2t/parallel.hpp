#pragma once

#include <cstddef>
#include <functional>

namespace t2t {

// Number of threads parallel_for uses when asked for `threads <= 0`:
// the OpenMP maximum, or 1 when built without OpenMP.
int hardware_threads();

// Runs fn(0) .. fn(n-1). threads == 1 is the serial reference path: a
// plain index-order loop. More threads dispatch through OpenMP (dynamic
// schedule). Callers must write results into disjoint per-index slots and
// do any cross-index merging afterwards in index order; under that
// discipline every outcome is bit-identical for any thread count. An
// exception thrown by fn is captured and rethrown on the calling thread;
// when several indices throw, the lowest index wins, so the surfaced
// error is deterministic too.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace t2t
