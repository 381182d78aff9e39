#pragma once

#include <optional>
#include <vector>

#include "subplan/task.hpp"

namespace subplan {

// Exhaustive breadth-first search under the sequential Result semantics.
// Serves as the ground-truth oracle for solvability and shortest length.
struct BfsResult {
  enum class Status { Solved, Unsolvable, CapExceeded } status;
  std::vector<ActionId> plan;  // shortest, deterministic tie-break by action id
  size_t states_seen = 0;
};

BfsResult bfs_plan(const GroundTask& task, size_t state_cap);

}  // namespace subplan
