#include "subplan/task.hpp"

namespace subplan {

State initial_state(const GroundTask& task) {
  return State{task.init, task.init_amounts};
}

bool applicable(const State& s, const GroundAction& a) {
  if (!a.pre_all.subset_of(s.facts)) return false;
  for (const auto& p : a.num_pre)
    if (s.amounts[p.res] < p.bound) return false;
  return true;
}

bool would_underflow(const State& s, const GroundAction& a) {
  if (a.num_eff.empty()) return false;
  std::vector<std::pair<ResourceId, Rational>> net;
  for (const auto& e : a.num_eff) {
    bool found = false;
    for (auto& [res, delta] : net)
      if (res == e.res) {
        delta += e.delta;
        found = true;
        break;
      }
    if (!found) net.emplace_back(e.res, e.delta);
  }
  for (auto& [res, delta] : net)
    if (s.amounts[res] + delta < Rational(0)) return true;
  return false;
}

State apply(const State& s, const GroundAction& a) {
  if (!applicable(s, a)) return s;  // no-op branch
  State next = s;
  // Happenings in timeline order (deletes before adds within each), so a
  // fact deleted at start and re-added at end survives the collapsed step.
  next.facts.subtract(a.del_start);
  next.facts.unite(a.add_start);
  next.facts.subtract(a.del_end);
  next.facts.unite(a.add_end);
  for (const auto& e : a.num_eff) {
    next.amounts[e.res] += e.delta;
  }
  for (const auto& e : a.num_eff) {
    if (next.amounts[e.res] < Rational(0))
      throw NumericUnderflow(a.name(), "resource " + std::to_string(e.res));
  }
  return next;
}

State apply_sequence(const GroundTask& task, State s, std::span<const ActionId> plan) {
  for (ActionId id : plan) s = apply(s, task.actions[id]);
  return s;
}

bool goal_satisfied(const GroundTask& task, const State& s) {
  for (FactId g : task.goals)
    if (!s.facts.test(g)) return false;
  return true;
}

}  // namespace subplan
