#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "subplan/mutex.hpp"
#include "subplan/task.hpp"

namespace subplan {

struct PlanStep {
  ActionId action = -1;
  int source = 0;  // owning subproblem
};

struct TemporalSchedule {
  std::vector<ScheduledAction> actions;  // same order as the input plan
  Rational makespan;
  std::vector<Conflict> residual_conflicts;  // indices into `actions`
};

class NumericInfeasible : public std::runtime_error {
public:
  explicit NumericInfeasible(const std::string& msg) : std::runtime_error(msg) {}
};

// Greedy earliest-start assignment in plan order. Each step starts no earlier
// than the end of its last preceding adder for every precondition (any
// source) and the ends of all preceding same-source mutex partners; the
// candidate then advances across event boundaries until no activation
// condition fires against a same-source step and the full numeric trace
// stays non-negative. Cross-source clashes are recorded, never repaired.
TemporalSchedule schedule(const GroundTask& task, std::span<const PlanStep> plan,
                          const MutexTable& table);

// Makespan of the greedy schedule for (all subplans except `t`, in index
// order) followed by the relaxed plan attributed to `t`. Numeric
// infeasibility degrades to the sequential horizon instead of throwing.
Rational estimate_makespan(const GroundTask& task,
                           const std::vector<std::vector<ActionId>>& subplans, int t,
                           std::span<const ActionId> relaxed_plan,
                           const MutexTable& table);

}  // namespace subplan
