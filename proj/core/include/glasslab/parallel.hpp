#pragma once

#include <cstddef>
#include <functional>

namespace glasslab {

// Worker count resolution: explicit argument > GLASSLAB_WORKERS env > hardware.
int default_workers();
int resolve_workers(int requested);

// Runs fn(0..n-1) on a fixed pool consuming an atomic index queue. fn must
// not throw; callers wanting failure policy catch inside fn.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

} // namespace glasslab
