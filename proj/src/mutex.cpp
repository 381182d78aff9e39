#include "subplan/mutex.hpp"

#include <algorithm>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace subplan {

MutexTable::MutexTable(std::vector<MutexEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) keys_.insert(key(e.a, e.b));
}

const MutexEntry* MutexTable::find(ActionId a, ActionId b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(a, b),
                             [](const MutexEntry& e, const std::pair<ActionId, ActionId>& k) {
                               return std::make_pair(e.a, e.b) < k;
                             });
  if (it != entries_.end() && it->a == a && it->b == b) return &*it;
  return nullptr;
}

namespace {

When del_tag(const GroundAction& a, FactId f) {
  return a.del_start.test(f) ? When::Start : When::End;
}
When add_tag(const GroundAction& a, FactId f) {
  return a.add_start.test(f) ? When::Start : When::End;
}
When pre_tag(const GroundAction& a, FactId f) {
  if (a.pre_start.test(f)) return When::Start;
  if (a.pre_overall.test(f)) return When::Overall;
  return When::End;
}

}  // namespace

std::optional<MutexEntry> mutex_between(const GroundAction& a, const GroundAction& b) {
  MutexEntry e;
  e.a = std::min(a.id, b.id);
  e.b = std::max(a.id, b.id);
  FactId f;
  if ((f = a.del_all.first_common(b.add_all)) >= 0) {
    e.cause = MutexCause::InconsistentEffects;
    e.witness = {f, del_tag(a, f), add_tag(b, f)};
    return e;
  }
  if ((f = b.del_all.first_common(a.add_all)) >= 0) {
    e.cause = MutexCause::InconsistentEffects;
    e.witness = {f, add_tag(a, f), del_tag(b, f)};
    return e;
  }
  if ((f = a.del_all.first_common(b.pre_all)) >= 0) {
    e.cause = MutexCause::Interference;
    e.witness = {f, del_tag(a, f), pre_tag(b, f)};
    return e;
  }
  if ((f = b.del_all.first_common(a.pre_all)) >= 0) {
    e.cause = MutexCause::Interference;
    e.witness = {f, pre_tag(a, f), del_tag(b, f)};
    return e;
  }
  return std::nullopt;
}

MutexTable persistent_mutexes(const GroundTask& task, ExecMode mode) {
  int n = task.action_count();
  std::vector<std::vector<MutexEntry>> rows(n);
  bool parallel = (mode == ExecMode::Parallel);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
#endif
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      auto e = mutex_between(task.actions[i], task.actions[j]);
      if (e) rows[i].push_back(*e);
    }
  }
  (void)parallel;
  std::vector<MutexEntry> entries;
  for (auto& row : rows)
    entries.insert(entries.end(), row.begin(), row.end());
  return MutexTable(std::move(entries));
}

namespace {

// One orientation of condition (a)/(b): x's preconditions or adds at `tag`
// against y's deletes at `tag`.
FactId boundary_clash(const GroundAction& x, const GroundAction& y, When tag) {
  const FactSet& pre = (tag == When::Start) ? x.pre_start : x.pre_end;
  const FactSet& add = (tag == When::Start) ? x.add_start : x.add_end;
  const FactSet& del = (tag == When::Start) ? y.del_start : y.del_end;
  FactId f = pre.first_common(del);
  if (f >= 0) return f;
  return add.first_common(del);
}

// Condition (c), oriented: x ends exactly when y starts.
FactId cross_clash(const GroundAction& x, const GroundAction& y) {
  FactId f;
  if ((f = x.del_end.first_common(y.add_start)) >= 0) return f;
  if ((f = x.del_end.first_common(y.pre_start)) >= 0) return f;
  if ((f = x.add_end.first_common(y.del_start)) >= 0) return f;
  if ((f = x.pre_end.first_common(y.del_start)) >= 0) return f;
  return -1;
}

bool strictly_inside(const Rational& t, const ScheduledAction& s) {
  return s.start < t && t < s.end;
}

}  // namespace

std::optional<ActiveWitness> is_active(const ScheduledAction& a, const GroundAction& ga,
                                       const ScheduledAction& b, const GroundAction& gb,
                                       const MutexTable* table) {
  if (table && a.action != b.action && !table->contains(a.action, b.action))
    return std::nullopt;

  FactId f;
  // (a) simultaneous starts: initial preconditions/adds against initial deletes.
  if (a.start == b.start) {
    if ((f = boundary_clash(ga, gb, When::Start)) >= 0)
      return ActiveWitness{'a', f, a.start, b.start};
    if ((f = boundary_clash(gb, ga, When::Start)) >= 0)
      return ActiveWitness{'a', f, a.start, b.start};
  }
  // (b) simultaneous ends: final preconditions/adds against final deletes.
  if (a.end == b.end) {
    if ((f = boundary_clash(ga, gb, When::End)) >= 0)
      return ActiveWitness{'b', f, a.end, b.end};
    if ((f = boundary_clash(gb, ga, When::End)) >= 0)
      return ActiveWitness{'b', f, a.end, b.end};
  }
  // (c) one ends exactly when the other starts.
  if (a.end == b.start && (f = cross_clash(ga, gb)) >= 0)
    return ActiveWitness{'c', f, a.end, b.start};
  if (b.end == a.start && (f = cross_clash(gb, ga)) >= 0)
    return ActiveWitness{'c', f, a.start, b.end};
  // (d) a boundary delete strictly inside the other's open interval against
  // its invariant preconditions.
  if (strictly_inside(a.start, b) &&
      (f = ga.del_start.first_common(gb.pre_overall)) >= 0)
    return ActiveWitness{'d', f, a.start, b.start};
  if (strictly_inside(a.end, b) && (f = ga.del_end.first_common(gb.pre_overall)) >= 0)
    return ActiveWitness{'d', f, a.end, b.start};
  if (strictly_inside(b.start, a) &&
      (f = gb.del_start.first_common(ga.pre_overall)) >= 0)
    return ActiveWitness{'d', f, a.start, b.start};
  if (strictly_inside(b.end, a) && (f = gb.del_end.first_common(ga.pre_overall)) >= 0)
    return ActiveWitness{'d', f, a.start, b.end};
  return std::nullopt;
}

ValidationReport validate(const GroundTask& task,
                          const std::vector<ScheduledAction>& schedule,
                          const MutexTable& table) {
  ValidationReport rep;
  int m = static_cast<int>(schedule.size());

  // Event timeline, processed in time order regardless of input order.
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (schedule[i].start != schedule[j].start)
      return schedule[i].start < schedule[j].start;
    return schedule[i].action < schedule[j].action;
  });

  std::vector<Rational> times;
  for (const auto& s : schedule) {
    times.push_back(s.start);
    times.push_back(s.end);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  State state = initial_state(task);
  std::vector<int> last_deleter(task.fact_count(), -1);  // step of latest delete per fact
  std::set<std::pair<int, int>> invariant_seen;  // (step, fact or -2-res)
  auto check_numeric = [&](const GroundAction& ga, When when, const Rational& t) {
    for (const auto& p : ga.num_pre) {
      if (p.when != when) continue;
      if (state.amounts[p.res] < p.bound)
        rep.unsupported.push_back(
            {-1, "requires " + task.resource_names[p.res] + " >= " + p.bound.str(), t});
    }
  };

  for (const Rational& t : times) {
    // Ends strictly before starts at the same instant.
    for (int i : order) {
      const auto& s = schedule[i];
      if (!(s.end == t) || s.start == s.end) continue;
      const GroundAction& ga = task.actions[s.action];
      ga.pre_end.for_each([&](FactId f) {
        if (!state.facts.test(f))
          rep.unsupported.push_back({i, task.fact_names[f], t, last_deleter[f]});
      });
      check_numeric(ga, When::End, t);
    }
    for (int i : order) {
      const auto& s = schedule[i];
      if (!(s.end == t) || s.start == s.end) continue;
      const GroundAction& ga = task.actions[s.action];
      state.facts.unite(ga.add_end);
    }
    for (int i : order) {
      const auto& s = schedule[i];
      if (!(s.end == t) || s.start == s.end) continue;
      const GroundAction& ga = task.actions[s.action];
      state.facts.subtract(ga.del_end);
      ga.del_end.for_each([&](FactId f) { last_deleter[f] = i; });
      for (const auto& e : ga.num_eff)
        if (e.when == When::End) state.amounts[e.res] += e.delta;
    }

    for (int i : order) {
      const auto& s = schedule[i];
      if (!(s.start == t)) continue;
      const GroundAction& ga = task.actions[s.action];
      ga.pre_start.for_each([&](FactId f) {
        if (!state.facts.test(f))
          rep.unsupported.push_back({i, task.fact_names[f], t, last_deleter[f]});
      });
      check_numeric(ga, When::Start, t);
      if (s.start == s.end) {  // collapsed non-temporal action
        ga.pre_end.for_each([&](FactId f) {
          if (!state.facts.test(f))
            rep.unsupported.push_back({i, task.fact_names[f], t, last_deleter[f]});
        });
        check_numeric(ga, When::End, t);
      }
    }
    for (int i : order) {
      const auto& s = schedule[i];
      if (!(s.start == t)) continue;
      const GroundAction& ga = task.actions[s.action];
      state.facts.unite(ga.add_start);
      if (s.start == s.end) state.facts.unite(ga.add_end);
    }
    for (int i : order) {
      const auto& s = schedule[i];
      if (!(s.start == t)) continue;
      const GroundAction& ga = task.actions[s.action];
      state.facts.subtract(ga.del_start);
      ga.del_start.for_each([&](FactId f) { last_deleter[f] = i; });
      for (const auto& e : ga.num_eff)
        if (e.when == When::Start) state.amounts[e.res] += e.delta;
      if (s.start == s.end) {
        state.facts.subtract(ga.del_end);
        ga.del_end.for_each([&](FactId f) { last_deleter[f] = i; });
        for (const auto& e : ga.num_eff)
          if (e.when == When::End) state.amounts[e.res] += e.delta;
      }
    }

    // Invariants across the segment starting here; resources stay in range.
    for (int i : order) {
      const auto& s = schedule[i];
      if (!(s.start <= t && t < s.end)) continue;
      const GroundAction& ga = task.actions[s.action];
      ga.pre_overall.for_each([&](FactId f) {
        if (!state.facts.test(f) && invariant_seen.insert({i, f}).second)
          rep.unsupported.push_back({i, task.fact_names[f], t, last_deleter[f]});
      });
      for (const auto& p : ga.num_pre) {
        if (p.when != When::Overall) continue;
        if (state.amounts[p.res] < p.bound &&
            invariant_seen.insert({i, -2 - p.res}).second)
          rep.unsupported.push_back(
              {i, "requires " + task.resource_names[p.res] + " >= " + p.bound.str(), t});
      }
    }
    for (ResourceId r = 0; r < task.resource_count(); ++r)
      if (state.amounts[r] < Rational(0))
        rep.unsupported.push_back({-1, task.resource_names[r] + " below zero", t});
  }

  rep.goal_ok = goal_satisfied(task, state);

  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      auto w = is_active(schedule[i], task.actions[schedule[i].action], schedule[j],
                         task.actions[schedule[j].action], &table);
      if (w) rep.conflicts.push_back({i, j, *w});
    }

  rep.verdict = rep.goal_ok && rep.conflicts.empty() && rep.unsupported.empty();
  return rep;
}

LocalityReport locality(const GroundTask& task,
                        const std::vector<ScheduledAction>& schedule,
                        const std::vector<int>& attribution, int stages,
                        const MutexTable& table) {
  if (attribution.size() != schedule.size())
    throw PartitionError("attribution covers " + std::to_string(attribution.size()) +
                         " steps, schedule has " + std::to_string(schedule.size()));
  for (int t : attribution)
    if (t < 0) throw PartitionError("negative subproblem index in attribution");
  if (stages <= 0) throw PartitionError("stage count must be positive");

  int m = static_cast<int>(schedule.size());
  Rational makespan(0);
  for (const auto& s : schedule) makespan = std::max(makespan, s.end);

  auto stage_of = [&](const ScheduledAction& s) -> int {
    if (makespan == Rational(0)) return 0;
    // floor(start * stages / makespan), clamped to the last stage
    Rational pos = s.start * Rational(stages) / makespan;
    int64_t idx = pos.num() / pos.den();
    return static_cast<int>(std::min<int64_t>(idx, stages - 1));
  };

  LocalityReport rep;
  for (int i = 0; i < m; ++i) {
    const GroundAction& gi = task.actions[schedule[i].action];
    for (int j = i + 1; j < m; ++j) {
      const GroundAction& gj = task.actions[schedule[j].action];
      bool structural = (schedule[i].action == schedule[j].action)
                            ? mutex_between(gi, gj).has_value()
                            : table.contains(schedule[i].action, schedule[j].action);
      if (!structural) continue;
      rep.n_c++;
      if (stage_of(schedule[i]) != stage_of(schedule[j])) rep.n_g_t++;
      if (attribution[i] != attribution[j]) {
        rep.n_g_g++;
        if (is_active(schedule[i], gi, schedule[j], gj)) rep.n_ga_g++;
      }
    }
  }
  if (rep.n_c > 0) {
    rep.r_g_t = Rational(rep.n_g_t, rep.n_c);
    rep.r_g_g = Rational(rep.n_g_g, rep.n_c);
    rep.r_ga_g = Rational(rep.n_ga_g, rep.n_c);
  }
  return rep;
}

}  // namespace subplan
