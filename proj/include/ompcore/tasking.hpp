#pragma once

// Explicit tasks on the innermost team's shared queue.

#include <cstddef>
#include <functional>
#include <optional>

#include "ompcore/runtime.hpp"

namespace ompcore {

/// Queues `body` on the current team. With `if_value == false` the body runs
/// before this call returns. In the implicit initial region (no enclosing
/// parallel_run) tasks also run immediately, and their exceptions propagate.
void task_submit(std::function<void()> body, std::optional<bool> if_value = std::nullopt);

/// Waits until every child task of the caller has completed, executing queued
/// tasks (newest first) meanwhile. Called from an implicit task, it also
/// consumes everything left in the team's queue.
void taskwait();

/// Runs the team's remaining queued tasks on the calling member.
void drain_at_region_end(TeamState& team);

/// Tasks waiting in the current team's queue.
std::size_t pending_tasks();

}  // namespace ompcore
