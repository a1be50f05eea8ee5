// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace gennav {

/// Worker count to use when the caller asked for 0 ("all cores").
int resolve_workers(int requested);

/// Calls fn(i) for i in [0, count) on up to `workers` threads. Results must be written
/// to per-index slots. If any call throws, the exception of the lowest failing index
/// is rethrown after all workers finish.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

} // namespace gennav
