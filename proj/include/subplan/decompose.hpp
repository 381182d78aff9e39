#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "subplan/mutex.hpp"
#include "subplan/pert.hpp"
#include "subplan/task.hpp"

namespace subplan {

// One goal conjunct with its backward-relevant actions. The landmark chain is
// filled on demand (it is only needed when the direct search times out) and
// the subplan slot is owned by the resolve loop.
struct Subproblem {
  FactId goal = -1;
  std::vector<ActionId> relevant;
  std::vector<FactId> landmark_chain;  // ordered, ends with `goal` once computed
  std::vector<PlanStep> subplan;
};

struct SubproblemSet {
  std::vector<Subproblem> subproblems;
};

// One subproblem per goal conjunct, in the order the conjuncts were written.
SubproblemSet partition(const GroundTask& task);

// Facts whose permanent suppression (never true at any level, all actions
// requiring them pruned) makes `subgoal` delete-free-unreachable. Candidates
// are the non-initial facts with a finite relaxed level. The chain is ordered
// by unsuppressed relaxed level (ties by fact id) and ends with the subgoal.
// Throws std::invalid_argument if the subgoal is unreachable to begin with.
std::vector<FactId> landmarks(const GroundTask& task, std::span<const ActionId> actions,
                              const State& init, FactId subgoal, bool parallel = false);

// Facts that can never hold simultaneously, with the transitions between them.
struct FactGroup {
  struct Edge {
    FactId from = -1;
    FactId to = -1;
    std::vector<ActionId> via;  // actions with `from` among pres, `to` among adds
  };
  std::vector<FactId> members;  // sorted by fact id
  std::vector<Edge> edges;      // sorted by (from, to)
};

// Groups of the form "all values of one predicate's last argument under a
// fixed prefix", kept only when at most one member holds initially and every
// action that adds a member also deletes a different member.
std::vector<FactGroup> fact_groups(const GroundTask& task);

class NoPathError : public std::runtime_error {
public:
  explicit NoPathError(const std::string& what) : std::runtime_error(what) {}
};

class NegativeWeightError : public std::runtime_error {
public:
  explicit NegativeWeightError(const std::string& what) : std::runtime_error(what) {}
};

// Keep only the lowest-id predecessor edge into `subgoal`, prune the actions
// labelling the disabled edges, and rerun the landmark analysis on the pruned
// action set. Throws NoPathError if `init_fact` can no longer reach `subgoal`
// through the group's transition graph.
std::vector<FactId> path_find(const GroundTask& task, std::span<const ActionId> actions,
                              const State& init, const FactGroup& group, FactId init_fact,
                              FactId subgoal, bool parallel = false);

// Per-edge weights for path_optimize: the cheapest labelling action, measured
// by duration (res == -1) or by how much of `res` the action consumes.
std::vector<Rational> edge_weights(const GroundTask& task, const FactGroup& group,
                                   ResourceId res = -1);

// Dijkstra shortest path through the group's transition graph; `weights`
// aligns with group.edges. Returns the path nodes after `init_fact`, ending
// with `subgoal`, to be installed as the landmark chain.
std::vector<FactId> path_optimize(const FactGroup& group, std::span<const Rational> weights,
                                  FactId init_fact, FactId subgoal);

// Least fixpoint of: an item is producible when some action whose fact
// preconditions are all producible and whose numeric bounds are all on
// producible resources adds it (facts) or increases it (resources). Actions
// with no preconditions seed the fixpoint.
struct ProducibleSet {
  FactSet facts;
  std::vector<bool> resources;
  std::vector<std::vector<ActionId>> fact_generators;      // indexed by FactId
  std::vector<std::vector<ActionId>> resource_generators;  // indexed by ResourceId
};

ProducibleSet detect_producible(const GroundTask& task);

// Plans the task with producible resources raised to a generous bound, then
// repeatedly strips the surplus (the lowest the resource ever dips during the
// schedule) from the initial amounts and re-plans, until nothing is unused or
// re-planning fails (the last good plan is kept). Standalone generator
// actions covering the residual need are prepended to the final plan.
struct ResourceLoopResult {
  bool solved = false;
  std::vector<PlanStep> plan;  // prepended generators + final merged plan
  TemporalSchedule schedule;
  std::vector<Rational> initial_amounts;       // minimal per-resource start
  std::vector<Rational> run_amounts;           // starts the schedule validates under
  std::vector<PlanStep> prepended;             // generator copies, in order
  std::vector<std::vector<Rational>> history;  // per resource: amount per round
};

// Returns the merged sequential plan for the (possibly amount-adjusted) task,
// or nullopt when planning fails.
using PlanFn = std::function<std::optional<std::vector<PlanStep>>(const GroundTask&)>;

ResourceLoopResult resource_loop(const GroundTask& task, const ProducibleSet& prod,
                                 const PlanFn& plan_fn, const MutexTable& table,
                                 int node_limit = 3000);

}  // namespace subplan
