#include "subplan/resolve.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <utility>

#include "subplan/rpg.hpp"
#include "subplan/search.hpp"

namespace subplan {

ViolationMatrix count_violations(const GroundTask& task, const TemporalSchedule& merged,
                                 const MutexTable& table, int nsub) {
  ViolationMatrix out;
  out.m.assign(nsub, std::vector<int>(nsub, 0));
  const auto& acts = merged.actions;
  for (size_t i = 0; i < acts.size(); ++i) {
    const ScheduledAction& a = acts[i];
    if (a.source < 0 || a.source >= nsub) continue;
    const GroundAction& ga = task.actions[a.action];
    for (size_t j = i + 1; j < acts.size(); ++j) {
      const ScheduledAction& b = acts[j];
      if (b.source < 0 || b.source >= nsub || b.source == a.source) continue;
      if (is_active(a, ga, b, task.actions[b.action], &table)) {
        ++out.m[a.source][b.source];
        ++out.m[b.source][a.source];
      }
    }
  }
  return out;
}

void update_penalties(PenaltyMatrix& p, const ViolationMatrix& m) {
  for (size_t t = 0; t < p.gamma.size(); ++t)
    for (size_t k = 0; k < p.gamma[t].size(); ++k)
      if (t != k) p.gamma[t][k] += p.xi * Rational(m.m[t][k]);
}

std::vector<StartState> start_states(const GroundTask& task,
                                     const std::vector<std::vector<PlanStep>>& subplans,
                                     int t) {
  std::vector<StartState> out;
  out.push_back({initial_state(task), -1, 0});
  auto push_unique = [&out](State s, int from, int prefix) {
    for (const StartState& have : out)
      if (have.state == s) return;
    out.push_back({std::move(s), from, prefix});
  };
  for (int k = 0; k < static_cast<int>(subplans.size()); ++k) {
    if (k == t) continue;
    State cur = initial_state(task);
    for (size_t p = 0; p < subplans[k].size(); ++p) {
      const GroundAction& ga = task.actions[subplans[k][p].action];
      if (applicable(cur, ga) && !would_underflow(cur, ga)) cur = apply(cur, ga);
      push_unique(cur, k, static_cast<int>(p) + 1);
    }
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Scored {
  Rational obj;
  TemporalSchedule sched;
  int total = 0;        // violation total of the merged schedule
  int unsupported = 0;  // preconditions without support on the merged timeline
};

struct Engine {
  const GroundTask& task;
  const ResolveConfig& cfg;
  Clock::time_point deadline;

  MutexTable table;
  SubproblemSet set;
  int N = 0;
  PenaltyMatrix penalties;
  std::vector<std::vector<PlanStep>> subplans;
  std::vector<std::vector<ActionId>> subplan_ids;
  std::vector<TemporalSchedule> schedules;  // standalone schedule per subplan
  std::vector<char> has_plan;
  TemporalSchedule merged;  // schedule of the current concatenation
  bool merged_ok = false;
  int last_total = 0;
  int64_t expansions = 0;
  PlanResult res;

  Engine(const GroundTask& tk, const ResolveConfig& c) : task(tk), cfg(c) {}

  bool out_of_time() const { return Clock::now() >= deadline; }

  std::vector<PlanStep> merged_plan() const {
    std::vector<PlanStep> out;
    for (const auto& sp : subplans) out.insert(out.end(), sp.begin(), sp.end());
    return out;
  }

  std::vector<PlanStep> merged_with(const std::vector<PlanStep>& cand, int t) const {
    std::vector<PlanStep> out;
    for (int k = 0; k < N; ++k) {
      const auto& sp = (k == t) ? cand : subplans[k];
      out.insert(out.end(), sp.begin(), sp.end());
    }
    return out;
  }

  // Cross-subproblem support losses on a merged timeline: each missing fact
  // precondition is charged to the (consumer, deleter) subproblem pair.  A
  // consumer whose support another subproblem's action removed violates a
  // constraint between the two subproblems just as an overlapping active pair
  // does, but when the merge serializes (support chains force strict
  // ordering) no activation condition fires and the pairwise counts go blind.
  // Charging the loss keeps the penalty gradient alive on serialized merges.
  // Losses whose pair is already active are skipped: that interference is
  // priced by the activation count and must not be counted twice.
  void charge_support_losses(ViolationMatrix& v, const TemporalSchedule& sched,
                             const std::vector<Unsupported>& unsupported) const {
    for (const Unsupported& u : unsupported) {
      if (u.step < 0 || u.deleted_by < 0) continue;
      const ScheduledAction& need = sched.actions[u.step];
      const ScheduledAction& took = sched.actions[u.deleted_by];
      if (need.source == took.source) continue;
      if (need.source < 0 || took.source < 0 || need.source >= N || took.source >= N) continue;
      if (is_active(need, task.actions[need.action], took, task.actions[took.action], &table))
        continue;
      ++v.m[need.source][took.source];
      ++v.m[took.source][need.source];
    }
  }

  // Acceptance objective for a candidate subplan of subproblem t: action
  // count, plus tau * merged makespan in quality mode, plus the penalty-
  // weighted violation counts of row t under the merged schedule (active
  // mutex pairs and support losses alike).
  std::optional<Scored> score(const std::vector<PlanStep>& cand, int t) {
    Scored s;
    try {
      s.sched = schedule(task, merged_with(cand, t), table);
    } catch (const NumericInfeasible&) {
      return std::nullopt;
    }
    ViolationMatrix viol = count_violations(task, s.sched, table, N);
    s.total = viol.total();
    ValidationReport vr = validate(task, s.sched.actions, table);
    s.unsupported = static_cast<int>(vr.unsupported.size());
    charge_support_losses(viol, s.sched, vr.unsupported);
    s.obj = Rational(static_cast<int64_t>(cand.size()));
    if (cfg.quality) s.obj += cfg.tau * s.sched.makespan;
    for (int k = 0; k < N; ++k)
      if (k != t) s.obj += penalties.gamma[t][k] * Rational(viol.m[t][k]);
    return s;
  }

  // Lone numeric resource that is both gated on and changed; -1 otherwise.
  ResourceId single_dynamic_resource() const {
    std::vector<char> gated(task.resource_count(), 0);
    std::vector<char> changed(task.resource_count(), 0);
    for (const GroundAction& ga : task.actions) {
      for (const NumericPre& np : ga.num_pre) gated[np.res] = 1;
      for (const NumericEffect& ne : ga.num_eff)
        if (ne.delta != Rational(0)) changed[ne.res] = 1;
    }
    ResourceId found = -1;
    for (ResourceId r = 0; r < task.resource_count(); ++r) {
      if (!gated[r] || !changed[r]) continue;
      if (found >= 0) return -1;
      found = r;
    }
    return found;
  }

  bool nonuniform_durations() const {
    Rational first;
    bool seen = false;
    for (const GroundAction& ga : task.actions) {
      if (!(ga.duration > Rational(0))) continue;
      if (!seen) {
        first = ga.duration;
        seen = true;
      } else if (ga.duration != first) {
        return true;
      }
    }
    return false;
  }

  // Compute (once) the landmark chain for subgoal t. When landmark analysis
  // yields nothing beyond the subgoal itself, fall back to path analysis over
  // the fact group containing the subgoal: shortest path by consumption when
  // exactly one gated resource changes, by duration when durations differ,
  // alternating-path landmark mining otherwise.
  void ensure_chain(int t) {
    Subproblem& sp = set.subproblems[t];
    if (!sp.landmark_chain.empty()) return;
    State init = initial_state(task);
    sp.landmark_chain = landmarks(task, sp.relevant, init, sp.goal, cfg.jobs > 1);
    if (sp.landmark_chain.size() > 2) return;
    auto groups = fact_groups(task);
    for (const FactGroup& grp : groups) {
      if (!std::binary_search(grp.members.begin(), grp.members.end(), sp.goal)) continue;
      FactId init_fact = -1;
      for (FactId f : grp.members)
        if (init.facts.test(f)) init_fact = f;
      if (init_fact < 0) break;
      try {
        ResourceId dyn = single_dynamic_resource();
        if (dyn >= 0) {
          auto w = edge_weights(task, grp, dyn);
          sp.landmark_chain = path_optimize(grp, w, init_fact, sp.goal);
        } else if (nonuniform_durations()) {
          auto w = edge_weights(task, grp, -1);
          sp.landmark_chain = path_optimize(grp, w, init_fact, sp.goal);
        } else {
          sp.landmark_chain =
              path_find(task, sp.relevant, init, grp, init_fact, sp.goal, cfg.jobs > 1);
        }
      } catch (const NoPathError&) {
        // keep the plain landmark chain
      } catch (const NegativeWeightError&) {
      }
      break;
    }
  }

  // One subplan attempt from one start state: direct search first; on timeout
  // solve the landmark chain hop by hop under the same node limit.
  std::optional<std::vector<ActionId>> attempt(int t, const State& start, int* root_h) {
    SearchContext ctx{task,
                      table,
                      set.subproblems[t].relevant,
                      subplan_ids,
                      schedules,
                      t,
                      penalties.gamma[t],
                      cfg.quality,
                      cfg.tau,
                      cfg.node_limit};
    FactSet goal(task.fact_count());
    goal.set(set.subproblems[t].goal);
    SearchResult direct = solve_subproblem(ctx, start, goal);
    expansions += direct.expansions;
    if (root_h) *root_h = direct.root_h;
    if (direct.status == SearchResult::Status::Solved) return direct.plan;
    if (direct.status != SearchResult::Status::Timeout) return std::nullopt;
    ensure_chain(t);
    const auto& chain = set.subproblems[t].landmark_chain;
    if (chain.size() <= 1) return std::nullopt;
    std::vector<ActionId> full;
    State cur = start;
    for (FactId f : chain) {
      if (out_of_time()) return std::nullopt;
      FactSet hop_goal(task.fact_count());
      hop_goal.set(f);
      SearchResult hop = solve_subproblem(ctx, cur, hop_goal);
      expansions += hop.expansions;
      if (hop.status != SearchResult::Status::Solved) return std::nullopt;
      full.insert(full.end(), hop.plan.begin(), hop.plan.end());
      cur = apply_sequence(task, cur, hop.plan);
    }
    return full;
  }

  // One subproblem evaluation: scan start states in order, accept the first
  // candidate that strictly improves the acceptance objective, else keep the
  // incumbent subplan.  Exact objective ties break toward the candidate whose
  // merged timeline leaves strictly fewer preconditions unsupported: a stale
  // incumbent computed from an outdated context can tie on penalties (its
  // missing support is invisible to the pairwise mutex counts) while being
  // unexecutable, and executability must win that tie.
  void evaluate(int t, int iter) {
    auto starts = start_states(task, subplans, t);
    std::optional<Rational> incumbent;
    int incumbent_unsupported = 0;
    if (has_plan[t]) {
      if (auto s = score(subplans[t], t)) {
        incumbent = s->obj;
        incumbent_unsupported = s->unsupported;
      }
      // an incumbent whose merge no longer schedules counts as infinite
    }
    int h_first = -1;
    bool have_h = false;
    for (const StartState& ss : starts) {
      if (out_of_time()) break;
      int rh = 0;
      auto cand = attempt(t, ss.state, &rh);
      if (!have_h) {
        h_first = rh;
        have_h = true;
      }
      if (!cand) continue;
      std::vector<PlanStep> steps;
      steps.reserve(cand->size());
      for (ActionId a : *cand) steps.push_back({a, t});
      auto sc = score(steps, t);
      if (!sc) continue;
      if (incumbent && !(sc->obj < *incumbent ||
                         (sc->obj == *incumbent && sc->unsupported < incumbent_unsupported)))
        continue;
      TemporalSchedule solo;
      try {
        solo = schedule(task, steps, table);  // the estimator needs this
      } catch (const NumericInfeasible&) {
        continue;
      }
      subplans[t] = std::move(steps);
      subplan_ids[t] = std::move(*cand);
      schedules[t] = std::move(solo);
      has_plan[t] = 1;
      merged = std::move(sc->sched);
      merged_ok = true;
      last_total = sc->total;
      break;
    }
    if (cfg.telemetry) {
      *cfg.telemetry << "iter=" << iter << " subgoal=" << t << " h="
                     << (have_h ? h_first : -1) << " violations=" << last_total
                     << " gamma_max=" << penalties.max_entry().str() << "\n";
    }
  }

  PlanResult finish(PlanResult::Status status, std::string message) {
    res.status = status;
    res.message = std::move(message);
    res.expansions = expansions;
    if (merged_ok) {
      res.schedule = merged;
      res.merged = merged_plan();
    }
    for (int t = 0; t < N; ++t) set.subproblems[t].subplan = subplans[t];
    res.subproblems = set;
    res.penalties = penalties;
    return res;
  }

  PlanResult run() {
    deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double>(cfg.time_budget_s));
    table = persistent_mutexes(task, cfg.jobs > 1 ? ExecMode::Parallel : ExecMode::Serial);
    set = partition(task);
    N = static_cast<int>(set.subproblems.size());
    penalties = PenaltyMatrix(N, cfg.strategy, cfg.gamma0, cfg.xi);
    subplans.assign(N, {});
    subplan_ids.assign(N, {});
    schedules.assign(N, {});
    has_plan.assign(N, 0);

    State init = initial_state(task);
    for (int t = 0; t < N; ++t) {
      FactSet g(task.fact_count());
      g.set(set.subproblems[t].goal);
      if (ff_heuristic(task, init, set.subproblems[t].relevant, g).h == RelaxedGraph::kInf)
        return finish(PlanResult::Status::Unsolvable,
                      "subgoal " + task.fact_names[set.subproblems[t].goal] +
                          " is unreachable even under delete relaxation");
    }

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
      res.iterations = iter;
      for (int t = 0; t < N; ++t) {
        if (out_of_time()) return finish(PlanResult::Status::Budget, "wall-clock budget exhausted");
        ++res.evaluations;
        evaluate(t, iter);
      }
      if (!merged_ok) {  // nothing accepted yet: schedule the (empty) concatenation
        merged = schedule(task, merged_plan(), table);
        merged_ok = true;
      }
      ViolationMatrix m = count_violations(task, merged, table, N);
      last_total = m.total();
      res.violation_history.push_back(last_total);
      ValidationReport vr = validate(task, merged.actions, table);
      if (vr.verdict) return finish(PlanResult::Status::Solved, "");
      charge_support_losses(m, merged, vr.unsupported);
      update_penalties(penalties, m);
      if (cfg.decrease && iter % 8 == 0) {
        Rational base = (cfg.strategy == PenaltyMatrix::Strategy::Ipc4) ? cfg.gamma0 : Rational(0);
        for (auto& row : penalties.gamma)
          for (Rational& g : row) g = std::max(base, g * Rational(1, 2));
      }
    }
    return finish(PlanResult::Status::Budget, "iteration budget exhausted");
  }
};

}  // namespace

PlanResult plan(const GroundTask& task, const ResolveConfig& cfg) {
  ProducibleSet prod = detect_producible(task);
  bool any_producible =
      std::any_of(prod.resources.begin(), prod.resources.end(), [](bool b) { return b; });
  if (!any_producible) return Engine(task, cfg).run();

  // Producible resources: plan inside the reduction loop, which raises the
  // amounts, strips unused surplus, re-plans, and prepends generators.
  PlanResult last, last_good;
  bool have_good = false;
  int64_t total_expansions = 0;
  PlanFn fn = [&](const GroundTask& work) -> std::optional<std::vector<PlanStep>> {
    last = Engine(work, cfg).run();
    total_expansions += last.expansions;
    if (last.status != PlanResult::Status::Solved) return std::nullopt;
    last_good = last;
    have_good = true;
    return last.merged;
  };
  MutexTable table =
      persistent_mutexes(task, cfg.jobs > 1 ? ExecMode::Parallel : ExecMode::Serial);
  ResourceLoopResult rl = resource_loop(task, prod, fn, table, cfg.node_limit);
  if (!rl.solved || !have_good) {
    last.resources = std::move(rl);
    last.expansions = total_expansions;
    return last;
  }
  for (size_t r = 0; r < rl.run_amounts.size(); ++r) {
    if (rl.run_amounts[r] > task.init_amounts[r]) {
      // the reduced plan assumes more of resource r than the task provides
      // and no generator covers the gap: fall back to the unraised task
      PlanResult direct = Engine(task, cfg).run();
      direct.resources = std::move(rl);
      direct.expansions += total_expansions;
      return direct;
    }
  }
  PlanResult out = std::move(last_good);
  out.merged = rl.plan;
  out.schedule = rl.schedule;
  out.resources = std::move(rl);
  out.expansions = total_expansions;
  return out;
}

}  // namespace subplan
