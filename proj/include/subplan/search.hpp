#pragma once

#include <span>
#include <vector>

#include "subplan/mutex.hpp"
#include "subplan/pert.hpp"
#include "subplan/rpg.hpp"
#include "subplan/task.hpp"

namespace subplan {

// Backward relevance fixpoint from the subgoal: every adder of a needed fact
// is relevant and queues its own preconditions; increasers of any resource a
// relevant action requires are relevant too. Returns sorted action ids.
std::vector<ActionId> reduce_actions(const GroundTask& task, const FactSet& subgoal);

// Estimated active-mutex counts against every other subproblem's stored
// schedule: the committed path runs back-to-back from time zero, the relaxed
// plan is appended sequentially after it, and a persistent-mutex pair counts
// when the closed intervals intersect. Entry t is always zero.
std::vector<int64_t> estimate_conflicts(const GroundTask& task,
                                        std::span<const ActionId> path,
                                        std::span<const ActionId> relaxed_plan,
                                        const std::vector<TemporalSchedule>& schedules,
                                        int t, const MutexTable& table);

// Penalty-biased node objective: h plus the weighted estimated conflicts,
// plus tau times the estimated makespan in quality mode.
Rational biased_objective(int h, std::span<const Rational> gamma_row,
                          std::span<const int64_t> m_tilde, int t, bool quality_mode,
                          const Rational& tau, const Rational& t_tilde);

struct SearchContext {
  const GroundTask& task;
  const MutexTable& table;
  std::span<const ActionId> actions;  // reduced action set, ascending ids
  // per-subproblem context for the bias terms
  const std::vector<std::vector<ActionId>>& subplans;     // sequential plans
  const std::vector<TemporalSchedule>& schedules;         // their stored times
  int t = 0;                                              // subproblem being solved
  std::span<const Rational> gamma_row;                    // penalties gamma[t][*]
  bool quality_mode = false;
  Rational tau = Rational(1, 10000);
  int node_limit = 3000;
};

struct SearchResult {
  enum class Status { Solved, Timeout, Unsolvable };
  Status status = Status::Unsolvable;
  std::vector<ActionId> plan;
  int expansions = 0;
  int root_h = 0;  // RelaxedGraph::kInf when the root is already hopeless
};

// Greedy best-first over apply-successors of the reduced set, keyed by
// (objective, h, generating action id, insertion order), helpful successors
// generated first, states deduplicated when pushed. The first popped state
// satisfying the subgoal wins.
SearchResult solve_subproblem(const SearchContext& ctx, const State& start,
                              const FactSet& subgoal);

}  // namespace subplan
