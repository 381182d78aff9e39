#pragma once

#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "subplan/task.hpp"

namespace subplan {

enum class ExecMode { Serial, Parallel };

enum class MutexCause : uint8_t { InconsistentEffects, Interference };

struct MutexWitness {
  FactId fact = -1;
  When tag_a = When::Start;  // bucket of the first action touching the fact
  When tag_b = When::Start;
  bool operator==(const MutexWitness&) const = default;
};

struct MutexEntry {
  ActionId a = -1, b = -1;  // a < b
  MutexCause cause = MutexCause::InconsistentEffects;
  MutexWitness witness;
  bool operator==(const MutexEntry&) const = default;
};

// Symmetric, irreflexive table of persistent mutex pairs.
class MutexTable {
public:
  MutexTable() = default;
  explicit MutexTable(std::vector<MutexEntry> entries);

  bool contains(ActionId a, ActionId b) const {
    if (a == b) return false;
    return keys_.count(key(a, b)) != 0;
  }
  const MutexEntry* find(ActionId a, ActionId b) const;
  const std::vector<MutexEntry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

private:
  static uint64_t key(ActionId a, ActionId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
           static_cast<uint32_t>(b);
  }
  std::vector<MutexEntry> entries_;  // sorted by (a, b)
  std::unordered_set<uint64_t> keys_;
};

// Structural test on one ordered pair; symmetric in its verdict.
// Inconsistent effects (one deletes an add of the other) are reported before
// interference (one deletes a precondition of the other). Competing needs are
// not materialized: they only ever occur alongside these two on the pairs the
// activation conditions can fire on.
std::optional<MutexEntry> mutex_between(const GroundAction& a, const GroundAction& b);

// Pairwise scan over all distinct action pairs. The parallel mode splits the
// outer loop across threads; entry order is identical in both modes.
MutexTable persistent_mutexes(const GroundTask& task, ExecMode mode = ExecMode::Serial);

struct ScheduledAction {
  ActionId action = -1;
  Rational start;
  Rational end;   // start + duration
  int source = 0; // owning subproblem
};

struct ActiveWitness {
  char condition = '?';  // 'a'..'d'
  FactId fact = -1;
  Rational time_a, time_b;  // endpoint of each action pinning the clash
};

// The four activation conditions, tested in letter order; the first satisfied
// one is returned. `table` is an optional pre-filter: any active pair of
// distinct actions is also persistently mutex.
std::optional<ActiveWitness> is_active(const ScheduledAction& a, const GroundAction& ga,
                                       const ScheduledAction& b, const GroundAction& gb,
                                       const MutexTable* table = nullptr);

struct Conflict {
  int step_a = -1, step_b = -1;  // indices into the schedule as given
  ActiveWitness witness;
};

struct Unsupported {
  int step = -1;  // -1 for resource-level violations
  std::string what;
  Rational time;
  // For fact preconditions: the schedule step whose delete effect most
  // recently removed the missing fact (-1 when the fact was never deleted).
  int deleted_by = -1;
};

struct ValidationReport {
  bool goal_ok = false;
  std::vector<Conflict> conflicts;
  std::vector<Unsupported> unsupported;
  bool verdict = false;
};

// Timeline simulation: end effects apply before start effects at equal times,
// invariant conditions are checked across every open interval, resources must
// stay non-negative, goals must hold at the end. Verdict is insensitive to
// the order of the input list.
ValidationReport validate(const GroundTask& task,
                          const std::vector<ScheduledAction>& schedule,
                          const MutexTable& table);

class PartitionError : public std::runtime_error {
public:
  explicit PartitionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct LocalityReport {
  int64_t n_c = 0;     // structural mutex pairs over schedule steps
  int64_t n_g_t = 0;   // pairs straddling different equal-width time stages
  int64_t n_g_g = 0;   // pairs across different subproblems
  int64_t n_ga_g = 0;  // cross-subproblem pairs active under the schedule
  Rational r_g_t, r_g_g, r_ga_g;
};

// `attribution[i]` is the subproblem owning schedule step i; `stages` is the
// number of equal-width horizon stages for the time partitioning.
LocalityReport locality(const GroundTask& task,
                        const std::vector<ScheduledAction>& schedule,
                        const std::vector<int>& attribution, int stages,
                        const MutexTable& table);

}  // namespace subplan
