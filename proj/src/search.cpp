#include "subplan/search.hpp"

#include <algorithm>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace subplan {

std::vector<ActionId> reduce_actions(const GroundTask& task, const FactSet& subgoal) {
  std::vector<char> fact_closed(task.fact_count(), 0);
  std::vector<char> res_closed(task.resource_count(), 0);
  std::vector<char> relevant(task.action_count(), 0);
  std::vector<FactId> open_facts;
  std::vector<ResourceId> open_res;
  subgoal.for_each([&](FactId f) { open_facts.push_back(f); });

  auto take = [&](const GroundAction& a) {
    if (relevant[a.id]) return;
    relevant[a.id] = 1;
    a.pre_all.for_each([&](FactId p) {
      if (!fact_closed[p]) open_facts.push_back(p);
    });
    for (const auto& p : a.num_pre)
      if (!res_closed[p.res]) open_res.push_back(p.res);
  };

  while (!open_facts.empty() || !open_res.empty()) {
    if (!open_facts.empty()) {
      FactId f = open_facts.back();
      open_facts.pop_back();
      if (fact_closed[f]) continue;
      fact_closed[f] = 1;
      for (const auto& a : task.actions)
        if (a.add_all.test(f)) take(a);
    } else {
      ResourceId r = open_res.back();
      open_res.pop_back();
      if (res_closed[r]) continue;
      res_closed[r] = 1;
      for (const auto& a : task.actions)
        for (const auto& e : a.num_eff)
          if (e.res == r && e.delta > Rational(0)) {
            take(a);
            break;
          }
    }
  }

  std::vector<ActionId> out;
  for (int a = 0; a < task.action_count(); ++a)
    if (relevant[a]) out.push_back(a);
  return out;
}

std::vector<int64_t> estimate_conflicts(const GroundTask& task,
                                        std::span<const ActionId> path,
                                        std::span<const ActionId> relaxed_plan,
                                        const std::vector<TemporalSchedule>& schedules,
                                        int t, const MutexTable& table) {
  std::vector<int64_t> m(schedules.size(), 0);
  if (relaxed_plan.empty()) return m;

  Rational horizon(0);
  for (ActionId a : path) horizon += task.actions[a].duration;
  std::vector<std::pair<Rational, Rational>> spans;  // relaxed placements
  Rational cursor = horizon;
  for (ActionId a : relaxed_plan) {
    Rational end = cursor + task.actions[a].duration;
    spans.push_back({cursor, end});
    cursor = end;
  }

  for (int k = 0; k < static_cast<int>(schedules.size()); ++k) {
    if (k == t) continue;
    for (const auto& s : schedules[k].actions) {
      for (size_t i = 0; i < relaxed_plan.size(); ++i) {
        ActionId r = relaxed_plan[i];
        bool pair = (r == s.action)
                        ? mutex_between(task.actions[r], task.actions[r]).has_value()
                        : table.contains(r, s.action);
        if (!pair) continue;
        if (spans[i].first <= s.end && s.start <= spans[i].second) m[k] += 1;
      }
    }
  }
  return m;
}

Rational biased_objective(int h, std::span<const Rational> gamma_row,
                          std::span<const int64_t> m_tilde, int t, bool quality_mode,
                          const Rational& tau, const Rational& t_tilde) {
  Rational obj(h);
  for (int k = 0; k < static_cast<int>(m_tilde.size()); ++k) {
    if (k == t || m_tilde[k] == 0) continue;
    obj += gamma_row[k] * Rational(m_tilde[k]);
  }
  if (quality_mode) obj += tau * t_tilde;
  return obj;
}

namespace {

struct StateHash {
  size_t operator()(const State& s) const { return s.hash(); }
};

struct Node {
  State state;
  int parent = -1;
  ActionId action = -1;
};

struct Evaluation {
  Rational objective;
  int h = 0;
};

}  // namespace

SearchResult solve_subproblem(const SearchContext& ctx, const State& start,
                              const FactSet& subgoal) {
  SearchResult result;
  const GroundTask& task = ctx.task;

  std::vector<Node> nodes;
  std::unordered_map<State, int, StateHash> seen;
  // key: objective, h, generating action id, insertion order, node index
  using Key = std::tuple<Rational, int, ActionId, int64_t, int>;
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> open;
  int64_t pushes = 0;

  auto path_of = [&](int idx) {
    std::vector<ActionId> path;
    for (int i = idx; i >= 0 && nodes[i].parent >= 0; i = nodes[i].parent)
      path.push_back(nodes[i].action);
    std::reverse(path.begin(), path.end());
    return path;
  };

  auto evaluate = [&](const State& s, const std::vector<ActionId>& path,
                      HeuristicValue& hv) -> Evaluation {
    hv = ff_heuristic(task, s, ctx.actions, subgoal);
    if (hv.h == RelaxedGraph::kInf) return {Rational(0), RelaxedGraph::kInf};
    auto m = estimate_conflicts(task, path, hv.relaxed_plan, ctx.schedules, ctx.t,
                                ctx.table);
    Rational t_tilde(0);
    if (ctx.quality_mode) {
      std::vector<ActionId> tail(path);
      tail.insert(tail.end(), hv.relaxed_plan.begin(), hv.relaxed_plan.end());
      t_tilde = estimate_makespan(task, ctx.subplans, ctx.t, tail, ctx.table);
    }
    return {biased_objective(hv.h, ctx.gamma_row, m, ctx.t, ctx.quality_mode, ctx.tau,
                             t_tilde),
            hv.h};
  };

  nodes.push_back({start, -1, -1});
  seen.emplace(start, 0);
  {
    HeuristicValue hv;
    auto ev = evaluate(start, {}, hv);
    result.root_h = ev.h;
    if (ev.h == RelaxedGraph::kInf) {
      result.status = SearchResult::Status::Unsolvable;
      return result;
    }
    open.push({ev.objective, ev.h, -1, pushes++, 0});
  }

  while (!open.empty()) {
    auto [obj, h, via, seq, idx] = open.top();
    open.pop();

    if (subgoal.subset_of(nodes[idx].state.facts)) {
      result.status = SearchResult::Status::Solved;
      result.plan = path_of(idx);
      return result;
    }
    if (result.expansions >= ctx.node_limit) {
      result.status = SearchResult::Status::Timeout;
      return result;
    }
    ++result.expansions;

    // helpful actions first, then the rest of the reduced set in id order
    State cur = nodes[idx].state;  // copy: nodes may reallocate while expanding
    std::vector<ActionId> path = path_of(idx);
    HeuristicValue cur_hv = ff_heuristic(task, cur, ctx.actions, subgoal);
    std::vector<char> tried(task.action_count(), 0);
    std::vector<ActionId> order;
    for (ActionId a : cur_hv.helpful)
      if (!tried[a]) {
        tried[a] = 1;
        order.push_back(a);
      }
    for (ActionId a : ctx.actions)
      if (!tried[a]) {
        tried[a] = 1;
        order.push_back(a);
      }

    for (ActionId a : order) {
      const GroundAction& ga = task.actions[a];
      if (!applicable(cur, ga) || would_underflow(cur, ga)) continue;
      State next = apply(cur, ga);
      if (seen.contains(next)) continue;
      int nidx = static_cast<int>(nodes.size());
      nodes.push_back({next, idx, a});
      seen.emplace(next, nidx);
      path.push_back(a);
      HeuristicValue hv;
      auto ev = evaluate(next, path, hv);
      path.pop_back();
      if (ev.h == RelaxedGraph::kInf) continue;  // dead end under relaxation
      open.push({ev.objective, ev.h, a, pushes++, nidx});
    }
  }

  result.status = SearchResult::Status::Unsolvable;
  return result;
}

}  // namespace subplan
