#include "subplan/bfs.hpp"

#include <deque>
#include <unordered_map>

namespace subplan {

namespace {
struct StateHash {
  size_t operator()(const State& s) const { return s.hash(); }
};
}  // namespace

BfsResult bfs_plan(const GroundTask& task, size_t state_cap) {
  BfsResult res{BfsResult::Status::Unsolvable, {}, 0};
  std::vector<State> states;
  std::vector<std::pair<int, ActionId>> parent;  // (state index, via action)
  std::unordered_map<State, int, StateHash> seen;

  State init = initial_state(task);
  states.push_back(init);
  parent.emplace_back(-1, -1);
  seen.emplace(init, 0);

  auto extract = [&](int idx) {
    std::vector<ActionId> plan;
    while (parent[idx].first >= 0) {
      plan.push_back(parent[idx].second);
      idx = parent[idx].first;
    }
    std::reverse(plan.begin(), plan.end());
    return plan;
  };

  std::deque<int> queue{0};
  while (!queue.empty()) {
    int idx = queue.front();
    queue.pop_front();
    if (goal_satisfied(task, states[idx])) {
      res.status = BfsResult::Status::Solved;
      res.plan = extract(idx);
      res.states_seen = states.size();
      return res;
    }
    State cur = states[idx];  // copy: states may reallocate below
    for (const GroundAction& a : task.actions) {
      if (!applicable(cur, a) || would_underflow(cur, a)) continue;
      State nxt = apply(cur, a);
      if (seen.count(nxt)) continue;
      if (states.size() >= state_cap) {
        res.status = BfsResult::Status::CapExceeded;
        res.states_seen = states.size();
        return res;
      }
      int nidx = static_cast<int>(states.size());
      states.push_back(nxt);
      parent.emplace_back(idx, a.id);
      seen.emplace(std::move(nxt), nidx);
      queue.push_back(nidx);
    }
  }
  res.states_seen = states.size();
  return res;
}

}  // namespace subplan
