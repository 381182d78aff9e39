#include "subplan/pert.hpp"

#include <algorithm>
#include <set>

namespace subplan {

namespace {

// Replays the numeric timeline of the given placements: end deltas precede
// start deltas at every instant, requirement bounds are checked before the
// owning action's own deltas land, and every resource must stay non-negative
// after each instant settles.
bool numeric_ok(const GroundTask& task, const std::vector<ScheduledAction>& placed) {
  if (task.resource_count() == 0) return true;
  std::vector<Rational> times;
  for (const auto& s : placed) {
    times.push_back(s.start);
    times.push_back(s.end);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<Rational> amounts = task.init_amounts;
  auto meets = [&](const GroundAction& ga, When when) {
    for (const auto& p : ga.num_pre)
      if (p.when == when && amounts[p.res] < p.bound) return false;
    return true;
  };
  for (const Rational& t : times) {
    for (const auto& s : placed) {
      if (!(s.end == t) || s.start == s.end) continue;
      if (!meets(task.actions[s.action], When::End)) return false;
    }
    for (const auto& s : placed) {
      if (!(s.end == t) || s.start == s.end) continue;
      for (const auto& e : task.actions[s.action].num_eff)
        if (e.when == When::End) amounts[e.res] += e.delta;
    }
    for (const auto& s : placed) {
      if (!(s.start == t)) continue;
      const GroundAction& ga = task.actions[s.action];
      if (!meets(ga, When::Start)) return false;
      if (s.start == s.end && !meets(ga, When::End)) return false;
    }
    for (const auto& s : placed) {
      if (!(s.start == t)) continue;
      for (const auto& e : task.actions[s.action].num_eff)
        if (e.when == When::Start || (s.start == s.end && e.when == When::End))
          amounts[e.res] += e.delta;
    }
    for (ResourceId r = 0; r < task.resource_count(); ++r)
      if (amounts[r] < Rational(0)) return false;
  }
  return true;
}

}  // namespace

TemporalSchedule schedule(const GroundTask& task, std::span<const PlanStep> plan,
                          const MutexTable& table) {
  TemporalSchedule out;
  std::vector<int> last_adder(task.fact_count(), -1);  // index into out.actions

  for (size_t i = 0; i < plan.size(); ++i) {
    const GroundAction& ga = task.actions[plan[i].action];

    // A collapsed adder lands its effects among the start-instant updates, so
    // a consumer sharing that instant would be checked before the add: its
    // bound is exclusive. Positive-duration adders settle with the enders and
    // may share their end instant — unless meeting the adder exactly would
    // activate the pair (an end-meets-start clash), in which case the handover
    // needs strict separation.
    Rational lb(0);
    bool exclusive = false;
    ga.pre_all.for_each([&](FactId f) {
      if (last_adder[f] < 0) return;
      const ScheduledAction& ad = out.actions[last_adder[f]];
      if (ad.end > lb) {
        lb = ad.end;
        exclusive = (ad.start == ad.end);
      } else if (ad.end == lb && ad.start == ad.end) {
        exclusive = true;
      }
    });
    if (!exclusive) {
      ga.pre_all.for_each([&](FactId f) {
        if (exclusive || last_adder[f] < 0) return;
        const ScheduledAction& ad = out.actions[last_adder[f]];
        if (!(ad.end == lb)) return;
        ScheduledAction trial{plan[i].action, lb, lb + ga.duration, plan[i].source};
        if (is_active(ad, task.actions[ad.action], trial, ga, &table)) exclusive = true;
      });
    }
    for (size_t j = 0; j < i; ++j) {
      if (out.actions[j].source != plan[i].source) continue;
      bool partners = (plan[j].action == plan[i].action)
                          ? mutex_between(ga, ga).has_value()
                          : table.contains(plan[j].action, plan[i].action);
      if (partners && out.actions[j].end > lb) {
        lb = out.actions[j].end;
        exclusive = false;
      }
    }

    // candidate starts: the bound itself (unless exclusive), every later
    // event boundary, then one step past everything already scheduled
    std::set<Rational> candidates;
    if (!exclusive) candidates.insert(lb);
    Rational horizon = lb;
    for (size_t j = 0; j < i; ++j) {
      if (out.actions[j].start > lb) candidates.insert(out.actions[j].start);
      if (out.actions[j].end > lb) candidates.insert(out.actions[j].end);
      horizon = std::max(horizon, out.actions[j].end);
    }
    candidates.insert(horizon + Rational(1));

    bool placed = false;
    for (const Rational& start : candidates) {
      ScheduledAction trial{plan[i].action, start, start + ga.duration, plan[i].source};
      bool clash = false;
      for (size_t j = 0; j < i && !clash; ++j) {
        if (out.actions[j].source != plan[i].source) continue;
        if (is_active(out.actions[j], task.actions[out.actions[j].action], trial, ga))
          clash = true;
      }
      if (clash) continue;
      out.actions.push_back(trial);
      if (!numeric_ok(task, out.actions)) {
        out.actions.pop_back();
        continue;
      }
      placed = true;
      break;
    }
    if (!placed)
      throw NumericInfeasible("no feasible start time for " + ga.name() +
                              " (step " + std::to_string(i) + ")");
    ga.add_all.for_each([&](FactId f) { last_adder[f] = static_cast<int>(i); });
  }

  out.makespan = Rational(0);
  for (const auto& s : out.actions) out.makespan = std::max(out.makespan, s.end);

  for (size_t i = 0; i < out.actions.size(); ++i)
    for (size_t j = i + 1; j < out.actions.size(); ++j) {
      auto w = is_active(out.actions[i], task.actions[out.actions[i].action],
                         out.actions[j], task.actions[out.actions[j].action], &table);
      if (w)
        out.residual_conflicts.push_back(
            {static_cast<int>(i), static_cast<int>(j), *w});
    }
  return out;
}

Rational estimate_makespan(const GroundTask& task,
                           const std::vector<std::vector<ActionId>>& subplans, int t,
                           std::span<const ActionId> relaxed_plan,
                           const MutexTable& table) {
  std::vector<PlanStep> steps;
  for (int k = 0; k < static_cast<int>(subplans.size()); ++k) {
    if (k == t) continue;
    for (ActionId a : subplans[k]) steps.push_back({a, k});
  }
  for (ActionId a : relaxed_plan) steps.push_back({a, t});
  try {
    return schedule(task, steps, table).makespan;
  } catch (const NumericInfeasible&) {
    Rational total(0);
    for (const auto& s : steps) total += task.actions[s.action].duration;
    return total;
  }
}

}  // namespace subplan
