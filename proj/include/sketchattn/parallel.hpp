#pragma once

#include <cstddef>
#include <functional>

namespace sketchattn {

/// Worker budget: SKETCHATTN_THREADS if set (0 or unset means one per
/// hardware thread).
std::size_t thread_budget();

/// Run fn(0) ... fn(count-1) across the thread budget. Each index must write
/// only to its own output slot; iteration order is unspecified but results
/// are merged by index, so output is deterministic regardless of the budget.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace sketchattn
