#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "subplan/decompose.hpp"
#include "subplan/mutex.hpp"
#include "subplan/pert.hpp"
#include "subplan/task.hpp"

namespace subplan {

// Pairwise penalty weights on cross-subproblem conflicts. The ipc4 strategy
// starts every weight at gamma0; the fresh strategy starts at zero.
struct PenaltyMatrix {
  enum class Strategy { Ipc4, Fresh };
  Strategy strategy = Strategy::Ipc4;
  Rational gamma0{100};
  Rational xi{1, 10};
  std::vector<std::vector<Rational>> gamma;  // N x N, diagonal unused

  PenaltyMatrix() = default;
  PenaltyMatrix(int n, Strategy s, Rational g0, Rational x)
      : strategy(s), gamma0(g0), xi(x) {
    Rational start = (s == Strategy::Ipc4) ? g0 : Rational(0);
    gamma.assign(n, std::vector<Rational>(n, start));
  }

  Rational max_entry() const {
    Rational m(0);
    for (const auto& row : gamma)
      for (const Rational& g : row) m = std::max(m, g);
    return m;
  }
};

struct ViolationMatrix {
  std::vector<std::vector<int>> m;  // N x N, symmetric, zero diagonal

  int total() const {
    int sum = 0;
    for (size_t t = 0; t < m.size(); ++t)
      for (size_t k = t + 1; k < m.size(); ++k) sum += m[t][k];
    return sum;
  }
};

// Count active mutexes between differently-attributed steps of one merged
// schedule: m[t][k] = number of active pairs with sources t and k.
ViolationMatrix count_violations(const GroundTask& task, const TemporalSchedule& merged,
                                 const MutexTable& table, int nsub);

// gamma[t][k] += xi * m[t][k], elementwise; never decreases.
void update_penalties(PenaltyMatrix& p, const ViolationMatrix& m);

// Candidate starting points for re-solving subproblem t: the initial state
// first, then the state after each sequential prefix of every other
// subproblem's subplan, in (subproblem, prefix length) order, deduplicated.
struct StartState {
  State state;
  int from = -1;   // subproblem the prefix came from; -1 for the initial state
  int prefix = 0;  // number of prefix actions applied
};

std::vector<StartState> start_states(const GroundTask& task,
                                     const std::vector<std::vector<PlanStep>>& subplans,
                                     int t);

struct ResolveConfig {
  PenaltyMatrix::Strategy strategy = PenaltyMatrix::Strategy::Ipc4;
  Rational gamma0{100};
  Rational xi{1, 10};
  Rational tau{1, 10000};
  int node_limit = 3000;
  int max_iters = 50;
  double time_budget_s = 1800.0;
  bool quality = false;   // charge makespan in the objectives
  int jobs = 1;           // >1 enables the parallel analysis kernels
  bool decrease = false;  // periodically decay penalties toward their floor
  std::ostream* telemetry = nullptr;
};

struct PlanResult {
  enum class Status { Solved, Unsolvable, Budget };
  Status status = Status::Budget;
  TemporalSchedule schedule;     // merged schedule; validated when Solved
  std::vector<PlanStep> merged;  // sequential merged plan with attribution
  SubproblemSet subproblems;     // final subplans and landmark chains
  std::vector<int> violation_history;  // active global count per iteration
  int iterations = 0;
  int evaluations = 0;        // subproblem evaluations performed
  int64_t expansions = 0;     // search nodes expanded across all solves
  PenaltyMatrix penalties;
  std::optional<ResourceLoopResult> resources;  // set when producibles exist
  std::string message;
};

// The partition-and-resolve outer loop: solve each subgoal with the biased
// base planner from multiple starting states, accept strict improvements of
// the penalty objective, merge and schedule, count cross-subproblem active
// mutexes, raise penalties, and stop once the merged schedule validates.
PlanResult plan(const GroundTask& task, const ResolveConfig& cfg = {});

}  // namespace subplan
