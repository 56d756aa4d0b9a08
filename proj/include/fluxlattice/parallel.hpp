#pragma once

#include <cstddef>
#include <functional>

namespace fluxlattice {

/// Worker count for a request of `threads` (0 = hardware concurrency).
unsigned resolve_threads(unsigned threads);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Work items
/// are claimed dynamically; callers write results into pre-sized slots so the
/// assembled output does not depend on scheduling. The first exception thrown
/// by any item is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace fluxlattice
