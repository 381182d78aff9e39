#include "subplan/rpg.hpp"

#include <algorithm>

namespace subplan {

RelaxedGraph relaxed_graph(const GroundTask& task, const State& state,
                           std::span<const ActionId> actions, const FactSet& goals) {
  (void)goals;  // the fixpoint is cheap enough to run to completion
  RelaxedGraph g;
  g.fact_levels.assign(task.fact_count(), RelaxedGraph::kInf);
  g.action_levels.assign(task.action_count(), RelaxedGraph::kInf);
  g.supporters.assign(task.fact_count(), -1);
  g.resource_unbounded.assign(task.resource_count(), false);

  FactSet reached = state.facts;
  reached.for_each([&](FactId f) { g.fact_levels[f] = 0; });

  int layer = 0;
  std::vector<ActionId> newly;
  while (true) {
    newly.clear();
    for (ActionId a : actions) {
      if (g.action_levels[a] != RelaxedGraph::kInf) continue;
      const GroundAction& ga = task.actions[a];
      if (!ga.pre_all.subset_of(reached)) continue;
      bool numeric_ok = true;
      for (const auto& p : ga.num_pre)
        if (!g.resource_unbounded[p.res] && state.amounts[p.res] < p.bound) {
          numeric_ok = false;
          break;
        }
      if (!numeric_ok) continue;
      g.action_levels[a] = layer + 1;  // effects land in the next layer
      newly.push_back(a);
    }
    if (newly.empty()) break;
    ++layer;
    for (ActionId a : newly) {
      const GroundAction& ga = task.actions[a];
      ga.add_all.for_each([&](FactId f) {
        if (g.fact_levels[f] == RelaxedGraph::kInf) {
          g.fact_levels[f] = layer;
          g.supporters[f] = a;
          reached.set(f);
        }
      });
      for (const auto& e : ga.num_eff)
        if (e.delta > Rational(0)) g.resource_unbounded[e.res] = true;
    }
  }
  g.layers = layer;
  return g;
}

HeuristicValue ff_heuristic(const GroundTask& task, const State& state,
                            std::span<const ActionId> actions, const FactSet& goals) {
  RelaxedGraph g = relaxed_graph(task, state, actions, goals);

  HeuristicValue hv;
  int max_level = 0;
  bool unreachable = false;
  goals.for_each([&](FactId f) {
    if (g.fact_levels[f] == RelaxedGraph::kInf)
      unreachable = true;
    else
      max_level = std::max(max_level, g.fact_levels[f]);
  });
  if (unreachable) {
    hv.h = RelaxedGraph::kInf;
    return hv;
  }

  std::vector<std::vector<FactId>> needed(max_level + 1);
  std::vector<char> fact_seen(task.fact_count(), 0);
  goals.for_each([&](FactId f) {
    if (g.fact_levels[f] > 0) {
      fact_seen[f] = 1;
      needed[g.fact_levels[f]].push_back(f);
    }
  });

  std::vector<char> act_seen(task.action_count(), 0);
  for (int level = max_level; level >= 1; --level) {
    std::sort(needed[level].begin(), needed[level].end());
    for (FactId f : needed[level]) {
      ActionId a = g.supporters[f];
      if (a < 0 || act_seen[a]) continue;
      act_seen[a] = 1;
      hv.relaxed_plan.push_back(a);
      task.actions[a].pre_all.for_each([&](FactId p) {
        int lp = g.fact_levels[p];
        if (lp > 0 && lp != RelaxedGraph::kInf && !fact_seen[p]) {
          fact_seen[p] = 1;
          needed[lp].push_back(p);
        }
      });
    }
  }

  std::sort(hv.relaxed_plan.begin(), hv.relaxed_plan.end(), [&](ActionId x, ActionId y) {
    return std::make_pair(g.action_levels[x], x) < std::make_pair(g.action_levels[y], y);
  });
  hv.h = static_cast<int>(hv.relaxed_plan.size());
  for (ActionId a : hv.relaxed_plan)
    if (g.action_levels[a] == 1) hv.helpful.push_back(a);
  return hv;
}

}  // namespace subplan
