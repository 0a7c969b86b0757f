// Index-ordered parallel dispatch for sweep grids: results land in
// caller-owned slots keyed by grid index, so output ordering is
// deterministic regardless of worker count.
#pragma once

#include <functional>

namespace cqed {

// Runs fn(0..n-1) on up to `workers` threads. fn must be exception-free
// (record failures into its own slot); a throw aborts the process intent-
// ionally rather than corrupting the sweep.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace cqed
