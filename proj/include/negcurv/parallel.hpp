#pragma once

#include <cstddef>
#include <functional>

namespace negcurv {

/// Worker count: NEGCURV_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, count). Bodies must
/// only write to disjoint ranges.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace negcurv
