#include "subplan/decompose.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "subplan/rpg.hpp"
#include "subplan/search.hpp"

namespace subplan {

namespace {

// Delete-free reachability with one fact forced false at every level: it is
// removed from the seed, never added, and every action requiring it is dead.
bool reaches_without(const GroundTask& task, std::span<const ActionId> actions,
                     const State& init, FactId subgoal, FactId suppressed) {
  FactSet reached = init.facts;
  if (suppressed >= 0) reached.clear(suppressed);
  std::vector<char> unbounded(task.resource_count(), 0);
  std::vector<char> fired(task.action_count(), 0);
  bool changed = true;
  while (changed && !reached.test(subgoal)) {
    changed = false;
    for (ActionId a : actions) {
      if (fired[a]) continue;
      const GroundAction& ga = task.actions[a];
      if (suppressed >= 0 && ga.pre_all.test(suppressed)) continue;
      if (!ga.pre_all.subset_of(reached)) continue;
      bool ok = true;
      for (const auto& p : ga.num_pre)
        if (!unbounded[p.res] && init.amounts[p.res] < p.bound) {
          ok = false;
          break;
        }
      if (!ok) continue;
      fired[a] = 1;
      changed = true;
      ga.add_all.for_each([&](FactId f) {
        if (f != suppressed) reached.set(f);
      });
      for (const auto& e : ga.num_eff)
        if (e.delta > Rational(0)) unbounded[e.res] = 1;
    }
  }
  return reached.test(subgoal);
}

}  // namespace

SubproblemSet partition(const GroundTask& task) {
  SubproblemSet out;
  out.subproblems.reserve(task.goals.size());
  for (FactId g : task.goals) {
    Subproblem sp;
    sp.goal = g;
    FactSet sub(task.fact_count());
    sub.set(g);
    sp.relevant = reduce_actions(task, sub);
    out.subproblems.push_back(std::move(sp));
  }
  return out;
}

std::vector<FactId> landmarks(const GroundTask& task, std::span<const ActionId> actions,
                              const State& init, FactId subgoal, bool parallel) {
  RelaxedGraph g = relaxed_graph(task, init, actions, FactSet(task.fact_count()));
  if (g.fact_levels[subgoal] == RelaxedGraph::kInf)
    throw std::invalid_argument("landmark analysis requires a reachable subgoal: " +
                                task.fact_names[subgoal]);

  std::vector<FactId> candidates;
  for (FactId f = 0; f < task.fact_count(); ++f)
    if (f != subgoal && g.fact_levels[f] != RelaxedGraph::kInf && !init.facts.test(f))
      candidates.push_back(f);

  const int n = static_cast<int>(candidates.size());
  std::vector<char> keep(n, 0);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int i = 0; i < n; ++i)
    keep[i] = !reaches_without(task, actions, init, subgoal, candidates[i]);

  std::vector<FactId> chain;
  for (int i = 0; i < n; ++i)
    if (keep[i]) chain.push_back(candidates[i]);
  std::sort(chain.begin(), chain.end(), [&](FactId x, FactId y) {
    if (g.fact_levels[x] != g.fact_levels[y]) return g.fact_levels[x] < g.fact_levels[y];
    return x < y;
  });
  chain.push_back(subgoal);
  return chain;
}

std::vector<FactGroup> fact_groups(const GroundTask& task) {
  // Bucket ground facts by everything before the last argument.
  std::map<std::string, std::vector<FactId>> buckets;
  for (FactId f = 0; f < task.fact_count(); ++f) {
    const std::string& name = task.fact_names[f];
    std::string inner = name.substr(1, name.size() - 2);
    auto pos = inner.rfind(' ');
    if (pos == std::string::npos) continue;  // no argument to vary
    buckets[inner.substr(0, pos)].push_back(f);
  }

  std::vector<FactGroup> out;
  for (auto& [prefix, facts] : buckets) {
    if (facts.size() < 2) continue;
    FactSet members(task.fact_count());
    for (FactId f : facts) members.set(f);

    int in_init = 0;
    for (FactId f : facts)
      if (task.init.test(f)) ++in_init;
    if (in_init > 1) continue;

    bool sound = true;
    for (const GroundAction& ga : task.actions) {
      std::vector<FactId> added;
      ga.add_all.for_each([&](FactId f) {
        if (members.test(f)) added.push_back(f);
      });
      if (added.empty()) continue;
      if (added.size() > 1) {
        sound = false;
        break;
      }
      bool deletes_sibling = false;
      ga.del_all.for_each([&](FactId f) {
        if (members.test(f) && f != added[0]) deletes_sibling = true;
      });
      if (!deletes_sibling) {
        sound = false;
        break;
      }
    }
    if (!sound) continue;

    FactGroup grp;
    grp.members = facts;  // bucket order is fact-name order == fact-id order
    std::sort(grp.members.begin(), grp.members.end());
    std::map<std::pair<FactId, FactId>, std::vector<ActionId>> edges;
    for (const GroundAction& ga : task.actions) {
      ga.pre_all.for_each([&](FactId f1) {
        if (!members.test(f1)) return;
        ga.add_all.for_each([&](FactId f2) {
          if (members.test(f2) && f2 != f1) edges[{f1, f2}].push_back(ga.id);
        });
      });
    }
    for (auto& [key, via] : edges)
      grp.edges.push_back({key.first, key.second, std::move(via)});
    out.push_back(std::move(grp));
  }
  std::sort(out.begin(), out.end(), [](const FactGroup& a, const FactGroup& b) {
    return a.members.front() < b.members.front();
  });
  return out;
}

std::vector<FactId> path_find(const GroundTask& task, std::span<const ActionId> actions,
                              const State& init, const FactGroup& group, FactId init_fact,
                              FactId subgoal, bool parallel) {
  auto member = [&](FactId f) {
    return std::binary_search(group.members.begin(), group.members.end(), f);
  };
  if (!member(subgoal) || !member(init_fact))
    throw std::invalid_argument("path_find endpoints must belong to the fact group");

  // Keep the lowest-id predecessor of the subgoal; actions labelling only the
  // other incoming edges are pruned.
  FactId keep = -1;
  for (const auto& e : group.edges)
    if (e.to == subgoal && (keep == -1 || e.from < keep)) keep = e.from;

  std::vector<char> pruned(task.action_count(), 0);
  for (const auto& e : group.edges)
    if (e.to == subgoal && e.from != keep)
      for (ActionId a : e.via) pruned[a] = 1;
  for (const auto& e : group.edges)
    if (e.to == subgoal && e.from == keep)
      for (ActionId a : e.via) pruned[a] = 0;

  // Connectivity over the surviving transition graph.
  std::vector<char> seen(task.fact_count(), 0);
  std::queue<FactId> frontier;
  frontier.push(init_fact);
  seen[init_fact] = 1;
  while (!frontier.empty()) {
    FactId f = frontier.front();
    frontier.pop();
    for (const auto& e : group.edges) {
      if (e.from != f || seen[e.to]) continue;
      bool alive = false;
      for (ActionId a : e.via)
        if (!pruned[a]) alive = true;
      if (!alive) continue;
      seen[e.to] = 1;
      frontier.push(e.to);
    }
  }
  if (!seen[subgoal])
    throw NoPathError("no transition path from " + task.fact_names[init_fact] + " to " +
                      task.fact_names[subgoal]);

  std::vector<ActionId> surviving;
  for (ActionId a : actions)
    if (!pruned[a]) surviving.push_back(a);
  return landmarks(task, surviving, init, subgoal, parallel);
}

std::vector<Rational> edge_weights(const GroundTask& task, const FactGroup& group,
                                   ResourceId res) {
  std::vector<Rational> out;
  out.reserve(group.edges.size());
  for (const auto& e : group.edges) {
    bool first = true;
    Rational best(0);
    for (ActionId a : e.via) {
      const GroundAction& ga = task.actions[a];
      Rational w(0);
      if (res < 0) {
        w = ga.duration;
      } else {
        for (const auto& ne : ga.num_eff)
          if (ne.res == res && ne.delta < Rational(0)) w += -ne.delta;
      }
      if (first || w < best) {
        best = w;
        first = false;
      }
    }
    out.push_back(best);
  }
  return out;
}

std::vector<FactId> path_optimize(const FactGroup& group, std::span<const Rational> weights,
                                  FactId init_fact, FactId subgoal) {
  if (weights.size() != group.edges.size())
    throw std::invalid_argument("path_optimize needs one weight per edge");
  for (const Rational& w : weights)
    if (w < Rational(0)) throw NegativeWeightError("negative edge weight in path_optimize");

  std::map<FactId, Rational> dist;
  std::map<FactId, FactId> parent;
  using Entry = std::pair<Rational, FactId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  dist[init_fact] = Rational(0);
  open.push({Rational(0), init_fact});
  while (!open.empty()) {
    auto [d, f] = open.top();
    open.pop();
    auto it = dist.find(f);
    if (it != dist.end() && it->second < d) continue;
    if (f == subgoal) break;
    for (size_t i = 0; i < group.edges.size(); ++i) {
      const auto& e = group.edges[i];
      if (e.from != f) continue;
      Rational nd = d + weights[i];
      auto found = dist.find(e.to);
      if (found == dist.end() || nd < found->second) {
        dist[e.to] = nd;
        parent[e.to] = f;
        open.push({nd, e.to});
      }
    }
  }
  if (!dist.contains(subgoal))
    throw NoPathError("path_optimize: subgoal unreachable in the transition graph");

  std::vector<FactId> chain;
  for (FactId f = subgoal; f != init_fact; f = parent.at(f)) chain.push_back(f);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

ProducibleSet detect_producible(const GroundTask& task) {
  ProducibleSet out;
  out.facts = FactSet(task.fact_count());
  out.resources.assign(task.resource_count(), false);
  out.fact_generators.resize(task.fact_count());
  out.resource_generators.resize(task.resource_count());

  auto qualifies = [&](const GroundAction& ga) {
    bool ok = true;
    ga.pre_all.for_each([&](FactId f) {
      if (!out.facts.test(f)) ok = false;
    });
    if (!ok) return false;
    for (const auto& p : ga.num_pre)
      if (!out.resources[p.res]) return false;
    return true;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const GroundAction& ga : task.actions) {
      if (!qualifies(ga)) continue;
      ga.add_all.for_each([&](FactId f) {
        if (!out.facts.test(f)) {
          out.facts.set(f);
          changed = true;
        }
      });
      for (const auto& e : ga.num_eff)
        if (e.delta > Rational(0) && !out.resources[e.res]) {
          out.resources[e.res] = true;
          changed = true;
        }
    }
  }

  for (const GroundAction& ga : task.actions) {
    if (!qualifies(ga)) continue;
    ga.add_all.for_each([&](FactId f) { out.fact_generators[f].push_back(ga.id); });
    for (const auto& e : ga.num_eff)
      if (e.delta > Rational(0)) out.resource_generators[e.res].push_back(ga.id);
  }
  return out;
}

namespace {

// The lowest value each resource reaches while the schedule executes, using
// the same instant ordering as the scheduler's feasibility replay (end deltas
// land before start deltas; zero-duration end deltas count with the start).
std::vector<Rational> trace_minima(const GroundTask& task, const TemporalSchedule& sch) {
  std::vector<Rational> amounts = task.init_amounts;
  std::vector<Rational> minima = amounts;
  std::vector<Rational> times;
  for (const auto& s : sch.actions) {
    times.push_back(s.start);
    times.push_back(s.end);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  for (const Rational& t : times) {
    for (const auto& s : sch.actions) {
      if (!(s.end == t) || s.start == s.end) continue;
      for (const auto& e : task.actions[s.action].num_eff)
        if (e.when == When::End) amounts[e.res] += e.delta;
    }
    for (const auto& s : sch.actions) {
      if (!(s.start == t)) continue;
      for (const auto& e : task.actions[s.action].num_eff)
        if (e.when == When::Start || (s.start == s.end && e.when == When::End))
          amounts[e.res] += e.delta;
    }
    for (ResourceId r = 0; r < task.resource_count(); ++r)
      minima[r] = std::min(minima[r], amounts[r]);
  }
  return minima;
}

int64_t ceil_div(const Rational& need, const Rational& per) {
  Rational q = need / per;
  return (q.num() + q.den() - 1) / q.den();
}

}  // namespace

ResourceLoopResult resource_loop(const GroundTask& task, const ProducibleSet& prod,
                                 const PlanFn& plan_fn, const MutexTable& table,
                                 int node_limit) {
  ResourceLoopResult out;
  out.history.resize(task.resource_count());

  GroundTask work = task;
  std::vector<ActionId> relevant = reduce_actions(task, task.goal_set());
  for (ResourceId r = 0; r < task.resource_count(); ++r) {
    if (!prod.resources[r]) continue;
    Rational total(0);
    for (ActionId a : relevant) {
      Rational worst(0);
      for (const auto& e : task.actions[a].num_eff)
        if (e.res == r && e.delta < Rational(0)) worst += -e.delta;
      total += worst;
    }
    work.init_amounts[r] = std::max(task.init_amounts[r], total * Rational(node_limit));
  }

  std::optional<std::vector<PlanStep>> best;
  GroundTask best_task = work;
  for (int round = 0; round < 50; ++round) {
    for (ResourceId r = 0; r < task.resource_count(); ++r)
      if (prod.resources[r]) out.history[r].push_back(work.init_amounts[r]);

    auto p = plan_fn(work);
    if (!p) {
      if (!best) return out;  // failed outright at the generous bound
      break;                  // failed at a reduced level: keep the last good plan
    }
    best = std::move(p);
    best_task = work;

    TemporalSchedule sch = schedule(work, *best, table);
    std::vector<Rational> mins = trace_minima(work, sch);
    bool surplus = false;
    for (ResourceId r = 0; r < task.resource_count(); ++r) {
      if (!prod.resources[r] || !(mins[r] > Rational(0))) continue;
      work.init_amounts[r] = work.init_amounts[r] - mins[r];
      surplus = true;
    }
    if (!surplus) break;
  }

  out.initial_amounts = best_task.init_amounts;

  // Cover what the plan still needs with standalone generators: actions with
  // no preconditions and no fact effects whose only job is to raise the
  // resource. Resources without such a generator keep their initial amount.
  GroundTask final_task = task;
  for (ResourceId r = 0; r < task.resource_count(); ++r) {
    if (!prod.resources[r]) continue;
    Rational need = best_task.init_amounts[r] - task.init_amounts[r];
    if (!(need > Rational(0))) {
      final_task.init_amounts[r] = best_task.init_amounts[r];
      continue;
    }
    ActionId gen = -1;
    Rational per(0);
    for (ActionId a : prod.resource_generators[r]) {
      const GroundAction& ga = task.actions[a];
      if (!ga.pre_all.empty() || !ga.num_pre.empty()) continue;
      if (!ga.add_all.empty() || !ga.del_all.empty()) continue;
      Rational gain(0);
      for (const auto& e : ga.num_eff)
        if (e.res == r && e.delta > Rational(0)) gain += e.delta;
      if (gain > Rational(0)) {
        gen = a;
        per = gain;
        break;
      }
    }
    if (gen == -1) {
      final_task.init_amounts[r] = best_task.init_amounts[r];
      continue;
    }
    int64_t copies = ceil_div(need, per);
    for (int64_t i = 0; i < copies; ++i)
      out.prepended.push_back({gen, 0});
  }

  out.plan = out.prepended;
  out.plan.insert(out.plan.end(), best->begin(), best->end());
  out.schedule = schedule(final_task, out.plan, table);
  out.run_amounts = final_task.init_amounts;
  out.solved = true;
  return out;
}

}  // namespace subplan
