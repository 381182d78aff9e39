#pragma once

#include <limits>
#include <span>
#include <vector>

#include "subplan/task.hpp"

namespace subplan {

// Layered delete-free reachability over a chosen action subset. Numeric
// requirements use a monotone closure: once any enabled action increases a
// resource, every bound on it is treated as attainable.
struct RelaxedGraph {
  static constexpr int kInf = std::numeric_limits<int>::max();

  // Level of a fact is the first layer it appears in (0 for the seed state).
  // Level of an action is the layer its effects land in, so seed-applicable
  // actions sit at level 1 and level(pre) < level(action) <= level(adds).
  std::vector<int> fact_levels;
  std::vector<int> action_levels;
  std::vector<ActionId> supporters;  // lowest-id earliest adder, -1 for seed facts
  std::vector<bool> resource_unbounded;
  int layers = 0;
};

RelaxedGraph relaxed_graph(const GroundTask& task, const State& state,
                           std::span<const ActionId> actions, const FactSet& goals);

struct HeuristicValue {
  int h = 0;  // RelaxedGraph::kInf when some goal is unreachable
  std::vector<ActionId> relaxed_plan;  // sorted by (level, id); empty when h is 0 or infinite
  std::vector<ActionId> helpful;       // relaxed-plan actions applicable in the seed state
};

// Backward extraction over supporters; h is the extracted plan length.
HeuristicValue ff_heuristic(const GroundTask& task, const State& state,
                            std::span<const ActionId> actions, const FactSet& goals);

}  // namespace subplan
