#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "subplan/bfs.hpp"
#include "subplan/ground.hpp"
#include "subplan/pddl.hpp"
#include "subplan/rpg.hpp"
#include "testutil.hpp"

using namespace subplan;
using testutil::TaskBuilder;

namespace {

std::vector<ActionId> all_actions(const GroundTask& task) {
  std::vector<ActionId> ids(task.action_count());
  for (int i = 0; i < task.action_count(); ++i) ids[i] = i;
  return ids;
}

// Set-based delete-free layering, independent of the bitset machinery.
// Only for tasks without resources.
std::vector<int> oracle_levels(const GroundTask& task, const State& state) {
  std::vector<int> level(task.fact_count(), RelaxedGraph::kInf);
  std::set<int> have;
  state.facts.for_each([&](FactId f) {
    have.insert(f);
    level[f] = 0;
  });
  std::vector<bool> used(task.action_count(), false);
  for (int layer = 1;; ++layer) {
    std::vector<int> fresh;
    for (int a = 0; a < task.action_count(); ++a) {
      if (used[a]) continue;
      bool ok = true;
      task.actions[a].pre_all.for_each([&](FactId f) {
        if (!have.count(f)) ok = false;
      });
      if (!ok) continue;
      used[a] = true;
      task.actions[a].add_all.for_each([&](FactId f) {
        if (!have.count(f) && level[f] == RelaxedGraph::kInf) fresh.push_back(f);
      });
    }
    if (fresh.empty()) break;
    for (int f : fresh) {
      level[f] = layer;
      have.insert(f);
    }
  }
  return level;
}

GroundTask strip_deletes(GroundTask task) {
  for (auto& a : task.actions) {
    a.del_start = FactSet(task.fact_count());
    a.del_end = FactSet(task.fact_count());
    a.del_all = FactSet(task.fact_count());
  }
  return task;
}

// Runs the relaxed plan in delete-free semantics, checking every
// precondition as it goes; returns false on any unsupported step.
bool executes_relaxed(const GroundTask& task, const State& start,
                      const std::vector<ActionId>& plan, const FactSet& goals) {
  FactSet cur = start.facts;
  for (ActionId a : plan) {
    if (!task.actions[a].pre_all.subset_of(cur)) return false;
    cur.unite(task.actions[a].add_all);
  }
  return goals.subset_of(cur);
}

}  // namespace

TEST_CASE("chain layering assigns forced levels") {
  TaskBuilder tb(3);
  ActionId a0 = tb.add({.name = "pq", .pre = {0}, .add = {1}});
  ActionId a1 = tb.add({.name = "qr", .pre = {1}, .add = {2}});
  tb.set_init({0});
  tb.set_goals({2});
  auto ids = all_actions(tb.task);
  State s = initial_state(tb.task);
  auto g = relaxed_graph(tb.task, s, ids, tb.task.goal_set());
  CHECK(g.fact_levels[0] == 0);
  CHECK(g.fact_levels[1] == 1);
  CHECK(g.fact_levels[2] == 2);
  CHECK(g.action_levels[a0] == 1);
  CHECK(g.action_levels[a1] == 2);
  CHECK(g.supporters[1] == a0);
  CHECK(g.supporters[2] == a1);
  CHECK(g.supporters[0] == -1);
  CHECK(g.layers == 2);
}

TEST_CASE("levels satisfy the monotone supporter invariants") {
  std::mt19937 rng(31);
  for (int round = 0; round < 50; ++round) {
    GroundTask task = testutil::random_strips(rng, 10, 25);
    auto ids = all_actions(task);
    State s = initial_state(task);
    auto g = relaxed_graph(task, s, ids, task.goal_set());

    auto want = oracle_levels(task, s);
    CHECK(g.fact_levels == want);

    for (int a = 0; a < task.action_count(); ++a) {
      if (g.action_levels[a] == RelaxedGraph::kInf) continue;
      task.actions[a].pre_all.for_each([&](FactId f) {
        CHECK(g.fact_levels[f] < g.action_levels[a]);
      });
      task.actions[a].add_all.for_each([&](FactId f) {
        CHECK(g.fact_levels[f] <= g.action_levels[a]);
      });
    }
    for (int f = 0; f < task.fact_count(); ++f) {
      if (g.supporters[f] < 0) continue;
      CHECK(g.action_levels[g.supporters[f]] == g.fact_levels[f]);
    }
  }
}

TEST_CASE("heuristic handles the canonical base cases") {
  TaskBuilder tb(4);
  ActionId a0 = tb.add({.name = "pq", .pre = {0}, .add = {1}});
  ActionId a1 = tb.add({.name = "qr", .pre = {1}, .add = {2}});
  ActionId a2 = tb.add({.name = "rs", .pre = {2}, .add = {3}});
  tb.set_init({0});
  auto ids = all_actions(tb.task);
  State s = initial_state(tb.task);

  SUBCASE("satisfied goal costs nothing") {
    FactSet goal(4);
    goal.set(0);
    auto hv = ff_heuristic(tb.task, s, ids, goal);
    CHECK(hv.h == 0);
    CHECK(hv.relaxed_plan.empty());
    CHECK(hv.helpful.empty());
  }

  SUBCASE("three-step chain costs three and the plan executes") {
    FactSet goal(4);
    goal.set(3);
    auto hv = ff_heuristic(tb.task, s, ids, goal);
    CHECK(hv.h == 3);
    CHECK(hv.relaxed_plan == std::vector<ActionId>{a0, a1, a2});
    CHECK(hv.helpful == std::vector<ActionId>{a0});
    CHECK(executes_relaxed(tb.task, s, hv.relaxed_plan, goal));
  }

  SUBCASE("a fact nothing adds is unreachable") {
    TaskBuilder tu(2);
    tu.add({.name = "noop", .pre = {0}, .add = {0}});
    tu.set_init({0});
    FactSet goal(2);
    goal.set(1);
    auto hv = ff_heuristic(tu.task, initial_state(tu.task), all_actions(tu.task), goal);
    CHECK(hv.h == RelaxedGraph::kInf);
    CHECK(hv.relaxed_plan.empty());
  }
}

TEST_CASE("numeric requirements use the monotone closure") {
  TaskBuilder tb(3, 1);
  // pump raises the resource; sink needs 10 of it; both gated on facts
  tb.add({.name = "pump", .pre = {0},
          .neff = {NumericEffect{0, Rational(2), When::Start}}});
  ActionId sink = tb.add({.name = "sink", .pre = {0}, .add = {1},
                          .npre = {NumericPre{0, Rational(10), When::Start}}});
  tb.set_init({0});
  tb.set_amount(0, Rational(1));
  auto ids = all_actions(tb.task);
  State s = initial_state(tb.task);
  FactSet goal(3);
  goal.set(1);

  auto g = relaxed_graph(tb.task, s, ids, goal);
  CHECK(g.resource_unbounded[0]);
  CHECK(g.fact_levels[1] != RelaxedGraph::kInf);
  CHECK(g.action_levels[sink] == 2);  // waits for the pump to enable the bound

  SUBCASE("without any increaser the bound stays unmet") {
    TaskBuilder tn(2, 1);
    tn.add({.name = "sink", .pre = {0}, .add = {1},
            .npre = {NumericPre{0, Rational(10), When::Start}}});
    tn.set_init({0});
    tn.set_amount(0, Rational(3));
    FactSet g2(2);
    g2.set(1);
    auto hv = ff_heuristic(tn.task, initial_state(tn.task), all_actions(tn.task), g2);
    CHECK(hv.h == RelaxedGraph::kInf);
  }

  SUBCASE("a seed amount meeting the bound needs no increaser") {
    TaskBuilder tm(2, 1);
    tm.add({.name = "sink", .pre = {0}, .add = {1},
            .npre = {NumericPre{0, Rational(10), When::Start}}});
    tm.set_init({0});
    tm.set_amount(0, Rational(10));
    FactSet g2(2);
    g2.set(1);
    auto hv = ff_heuristic(tm.task, initial_state(tm.task), all_actions(tm.task), g2);
    CHECK(hv.h == 1);
  }
}

TEST_CASE("transport levels match the delete-free oracle") {
  const char* dom = R"((define (domain transport)
  (:requirements :strips :typing)
  (:types truck package loc - object)
  (:predicates (at-truck ?t - truck ?l - loc) (at-pkg ?p - package ?l - loc)
               (in ?p - package ?t - truck))
  (:action move
    :parameters (?t - truck ?from ?to - loc)
    :precondition (and (at-truck ?t ?from))
    :effect (and (at-truck ?t ?to) (not (at-truck ?t ?from))))
  (:action load
    :parameters (?p - package ?t - truck ?l - loc)
    :precondition (and (at-pkg ?p ?l) (at-truck ?t ?l))
    :effect (and (in ?p ?t) (not (at-pkg ?p ?l))))
  (:action unload
    :parameters (?p - package ?t - truck ?l - loc)
    :precondition (and (in ?p ?t) (at-truck ?t ?l))
    :effect (and (at-pkg ?p ?l) (not (in ?p ?t)))))
)";
  const char* prob = R"((define (problem transport-mini)
  (:domain transport)
  (:objects t1 - truck p1 - package a b c - loc)
  (:init (at-truck t1 a) (at-pkg p1 b))
  (:goal (and (at-pkg p1 c))))
)";
  auto d = pddl::parse_domain(dom, "t.pddl");
  auto p = pddl::parse_problem(prob, "t1.pddl");
  GroundTask task = ground(d, p, "t.pddl", "t1.pddl");
  State s = initial_state(task);
  auto g = relaxed_graph(task, s, all_actions(task), task.goal_set());
  CHECK(g.fact_levels == oracle_levels(task, s));

  auto hv = ff_heuristic(task, s, all_actions(task), task.goal_set());
  // move b, load, move c, unload cannot be beaten under the relaxation
  CHECK(hv.h >= 4);
  CHECK(executes_relaxed(task, s, hv.relaxed_plan, task.goal_set()));
}

TEST_CASE("random delete-free tasks satisfy the heuristic contracts") {
  std::mt19937 rng(515);
  int solvable = 0, unsolvable = 0;
  for (int round = 0; round < 200; ++round) {
    GroundTask task = strip_deletes(testutil::random_strips(rng, 9, 14));
    State s = initial_state(task);
    auto ids = all_actions(task);
    auto hv = ff_heuristic(task, s, ids, task.goal_set());

    CHECK((hv.h == 0) == goal_satisfied(task, s));
    CHECK(hv.h == static_cast<int>(hv.relaxed_plan.size()) +
                      (hv.h == RelaxedGraph::kInf ? RelaxedGraph::kInf : 0));

    auto oracle = bfs_plan(task, 1 << 18);
    if (hv.h == RelaxedGraph::kInf) {
      CHECK(oracle.status == BfsResult::Status::Unsolvable);
      ++unsolvable;
    } else {
      REQUIRE(oracle.status == BfsResult::Status::Solved);
      CHECK(executes_relaxed(task, s, hv.relaxed_plan, task.goal_set()));
      CHECK(hv.h >= static_cast<int>(oracle.plan.size()));
      ++solvable;
    }

    // helpful actions are exactly the seed-applicable relaxed-plan steps
    for (ActionId a : hv.helpful) CHECK(applicable(s, task.actions[a]));
  }
  CHECK(solvable > 50);
  CHECK(unsolvable > 20);
}

// ---- subproblem solver ----

#include "subplan/search.hpp"

namespace {

GroundTask filter_task(const GroundTask& task, const std::vector<ActionId>& keep) {
  GroundTask t2 = task;
  t2.actions.clear();
  t2.action_ids.clear();
  for (ActionId a : keep) {
    GroundAction ga = task.actions[a];
    ga.id = static_cast<ActionId>(t2.actions.size());
    t2.action_ids[ga.name()] = ga.id;
    t2.actions.push_back(std::move(ga));
  }
  return t2;
}

struct SolverRig {
  const GroundTask& task;
  MutexTable table;
  std::vector<ActionId> reduced;
  std::vector<std::vector<ActionId>> subplans;
  std::vector<TemporalSchedule> schedules;
  std::vector<Rational> gamma;

  SolverRig(const GroundTask& t, const FactSet& subgoal, int nsub = 1)
      : task(t),
        table(persistent_mutexes(t)),
        reduced(reduce_actions(t, subgoal)),
        subplans(nsub),
        schedules(nsub),
        gamma(nsub, Rational(0)) {}

  SearchContext ctx(int t = 0, bool quality = false, int limit = 3000) {
    return SearchContext{task,  table,   reduced, subplans,          schedules,
                         t,     gamma,   quality, Rational(1, 10000), limit};
  }
};

}  // namespace

TEST_CASE("relevance reduction keeps exactly the backward-reachable actions") {
  SUBCASE("a one-step gap keeps only its action") {
    TaskBuilder tb(3);
    ActionId hit = tb.add({.name = "hit", .pre = {0}, .add = {1}});
    tb.add({.name = "noise", .pre = {2}, .add = {2}});
    tb.set_init({0});
    FactSet sub(3);
    sub.set(1);
    CHECK(reduce_actions(tb.task, sub) == std::vector<ActionId>{hit});
  }

  SUBCASE("other packages' handling drops out in transport") {
    const char* dom = R"((define (domain transport)
  (:requirements :strips :typing)
  (:types truck package loc - object)
  (:predicates (at-truck ?t - truck ?l - loc) (at-pkg ?p - package ?l - loc)
               (in ?p - package ?t - truck))
  (:action move
    :parameters (?t - truck ?from ?to - loc)
    :precondition (and (at-truck ?t ?from))
    :effect (and (at-truck ?t ?to) (not (at-truck ?t ?from))))
  (:action load
    :parameters (?p - package ?t - truck ?l - loc)
    :precondition (and (at-pkg ?p ?l) (at-truck ?t ?l))
    :effect (and (in ?p ?t) (not (at-pkg ?p ?l))))
  (:action unload
    :parameters (?p - package ?t - truck ?l - loc)
    :precondition (and (in ?p ?t) (at-truck ?t ?l))
    :effect (and (at-pkg ?p ?l) (not (in ?p ?t)))))
)";
    const char* prob = R"((define (problem transport-two)
  (:domain transport)
  (:objects t1 - truck p1 p2 - package a b - loc)
  (:init (at-truck t1 a) (at-pkg p1 a) (at-pkg p2 a))
  (:goal (and (at-pkg p1 b) (at-pkg p2 b))))
)";
    auto d = pddl::parse_domain(dom, "t.pddl");
    auto p = pddl::parse_problem(prob, "t1.pddl");
    GroundTask task = ground(d, p, "t.pddl", "t1.pddl");
    FactSet sub(task.fact_count());
    sub.set(task.fact_ids.at("(at-pkg p1 b)"));
    auto keep = reduce_actions(task, sub);
    for (ActionId a : keep) {
      CHECK(task.actions[a].name().find("p2") == std::string::npos);
    }
    bool has_move = false;
    for (ActionId a : keep)
      if (task.actions[a].schema == "move") has_move = true;
    CHECK(has_move);
  }

  SUBCASE("increasers of a required resource stay relevant") {
    TaskBuilder tb(2, 2);
    ActionId sink = tb.add({.name = "sink", .pre = {0}, .add = {1},
                            .npre = {NumericPre{0, Rational(5), When::Start}}});
    ActionId pump = tb.add({.name = "pump",
                            .neff = {NumericEffect{0, Rational(1), When::Start}}});
    tb.add({.name = "drain",
            .neff = {NumericEffect{0, Rational(-1), When::Start}}});
    tb.add({.name = "other-pump",
            .neff = {NumericEffect{1, Rational(1), When::Start}}});
    tb.set_init({0});
    FactSet sub(2);
    sub.set(1);
    CHECK(reduce_actions(tb.task, sub) == std::vector<ActionId>{sink, pump});
  }

  SUBCASE("reduction preserves solvability on random tasks") {
    std::mt19937 rng(606);
    for (int round = 0; round < 100; ++round) {
      GroundTask task = testutil::random_strips(rng, 8, 12);
      auto keep = reduce_actions(task, task.goal_set());
      GroundTask reduced = filter_task(task, keep);
      auto full = bfs_plan(task, 1 << 16);
      auto cut = bfs_plan(reduced, 1 << 16);
      REQUIRE(full.status != BfsResult::Status::CapExceeded);
      REQUIRE(cut.status != BfsResult::Status::CapExceeded);
      CHECK(full.status == cut.status);
    }
  }
}

TEST_CASE("conflict estimation counts overlapping mutex pairs") {
  TaskBuilder tb(3);
  ActionId grab = tb.add({.name = "grab", .pre = {0}, .add = {1}, .del = {0}});
  ActionId user = tb.add({.name = "user", .pre = {0}, .add = {2}, .del = {0}});
  ActionId clean = tb.add({.name = "clean", .pre = {1}, .add = {2}});
  tb.set_init({0});
  MutexTable table = persistent_mutexes(tb.task);
  std::vector<TemporalSchedule> schedules(2);
  schedules[1].actions = {ScheduledAction{user, Rational(0), Rational(0), 1}};

  SUBCASE("an empty relaxed plan estimates zero everywhere") {
    auto m = estimate_conflicts(tb.task, {}, {}, schedules, 0, table);
    CHECK(m == std::vector<int64_t>{0, 0});
  }

  SUBCASE("one overlapping mutex pair lands in the right slot") {
    std::vector<ActionId> relaxed = {grab};
    auto m = estimate_conflicts(tb.task, {}, relaxed, schedules, 0, table);
    CHECK(m == std::vector<int64_t>{0, 1});
  }

  SUBCASE("a non-mutex relaxed action estimates zero") {
    std::vector<ActionId> relaxed = {clean};
    auto m = estimate_conflicts(tb.task, {}, relaxed, schedules, 0, table);
    CHECK(m == std::vector<int64_t>{0, 0});
  }

  SUBCASE("a long committed path pushes the relaxed span past the clash") {
    TaskBuilder td(3);
    ActionId wait = td.add({.name = "wait", .pre = {0}, .add = {1}, .dur = Rational(5)});
    ActionId grab2 = td.add({.name = "grab2", .pre = {1}, .add = {2}, .del = {0}});
    ActionId user2 = td.add({.name = "user2", .pre = {0}, .del = {0}});
    MutexTable t2 = persistent_mutexes(td.task);
    std::vector<TemporalSchedule> sch(2);
    sch[1].actions = {ScheduledAction{user2, Rational(0), Rational(0), 1}};
    std::vector<ActionId> path = {wait};
    std::vector<ActionId> relaxed = {grab2};
    // relaxed span starts at the path horizon (5), after the stored clash at 0
    auto m = estimate_conflicts(td.task, path, relaxed, sch, 0, t2);
    CHECK(m == std::vector<int64_t>{0, 0});
    // with no committed path the spans touch and the pair counts
    auto m2 = estimate_conflicts(td.task, {}, relaxed, sch, 0, t2);
    CHECK(m2 == std::vector<int64_t>{0, 1});
  }

  SUBCASE("random cases match an independent recount") {
    std::mt19937 rng(8181);
    GroundTask task = testutil::random_strips(rng, 8, 15, true);
    MutexTable t2 = persistent_mutexes(task);
    std::uniform_int_distribution<int> act(0, task.action_count() - 1);
    std::uniform_int_distribution<int> start(0, 6);
    for (int round = 0; round < 50; ++round) {
      std::vector<TemporalSchedule> sch(3);
      for (int k = 1; k < 3; ++k)
        for (int i = 0; i < 4; ++i) {
          ActionId a = act(rng);
          Rational s(start(rng));
          sch[k].actions.push_back({a, s, s + task.actions[a].duration, k});
        }
      std::vector<ActionId> path, relaxed;
      for (int i = 0; i < 2; ++i) path.push_back(act(rng));
      for (int i = 0; i < 3; ++i) relaxed.push_back(act(rng));

      auto got = estimate_conflicts(task, path, relaxed, sch, 0, t2);

      Rational h(0);
      for (ActionId a : path) h += task.actions[a].duration;
      std::vector<int64_t> want(3, 0);
      for (int k = 1; k < 3; ++k)
        for (const auto& s : sch[k].actions) {
          Rational cursor = h;
          for (ActionId r : relaxed) {
            Rational rend = cursor + task.actions[r].duration;
            if (mutex_between(task.actions[r], task.actions[s.action]) &&
                cursor <= s.end && s.start <= rend)
              want[k] += 1;
            cursor = rend;
          }
        }
      CHECK(got == want);
    }
  }
}

TEST_CASE("the biased objective weighs penalties and the horizon") {
  std::vector<Rational> gamma = {Rational(0), Rational(100)};
  std::vector<int64_t> m = {0, 2};

  SUBCASE("zero penalties leave the heuristic alone") {
    std::vector<Rational> zero = {Rational(0), Rational(0)};
    CHECK(biased_objective(4, zero, m, 0, false, Rational(1, 10000), Rational(0)) ==
          Rational(4));
  }

  SUBCASE("weighted estimated conflicts add on") {
    CHECK(biased_objective(4, gamma, m, 0, false, Rational(1, 10000), Rational(0)) ==
          Rational(204));
  }

  SUBCASE("quality mode charges the makespan") {
    std::vector<Rational> zero = {Rational(0), Rational(0)};
    CHECK(biased_objective(4, zero, m, 0, true, Rational(1, 10000), Rational(50)) ==
          Rational(801, 200));
  }

  SUBCASE("raising any penalty never lowers the objective") {
    std::mt19937 rng(11);
    for (int round = 0; round < 200; ++round) {
      int k = static_cast<int>(rng() % 4);
      std::vector<Rational> g1(4), g2(4);
      std::vector<int64_t> mm(4);
      for (int i = 0; i < 4; ++i) {
        g1[i] = Rational(static_cast<int>(rng() % 50));
        g2[i] = g1[i];
        mm[i] = static_cast<int64_t>(rng() % 3);
      }
      g2[k] += Rational(static_cast<int>(rng() % 10) + 1);
      int h = static_cast<int>(rng() % 6);
      auto lo = biased_objective(h, g1, mm, 0, false, Rational(1, 10000), Rational(0));
      auto hi = biased_objective(h, g2, mm, 0, false, Rational(1, 10000), Rational(0));
      CHECK(lo <= hi);
    }
  }
}

TEST_CASE("the solver handles the base cases") {
  TaskBuilder tb(3);
  ActionId a0 = tb.add({.name = "s0", .pre = {0}, .add = {1}, .del = {0}});
  ActionId a1 = tb.add({.name = "s1", .pre = {1}, .add = {2}, .del = {1}});
  tb.set_init({0});
  State init = initial_state(tb.task);

  SUBCASE("a satisfied subgoal needs no plan") {
    FactSet sub(3);
    sub.set(0);
    SolverRig rig(tb.task, sub);
    auto r = solve_subproblem(rig.ctx(), init, sub);
    CHECK(r.status == SearchResult::Status::Solved);
    CHECK(r.plan.empty());
    CHECK(r.expansions == 0);
    CHECK(r.root_h == 0);
  }

  SUBCASE("a one-action gap takes that action") {
    FactSet sub(3);
    sub.set(1);
    SolverRig rig(tb.task, sub);
    auto r = solve_subproblem(rig.ctx(), init, sub);
    CHECK(r.status == SearchResult::Status::Solved);
    CHECK(r.plan == std::vector<ActionId>{a0});
    CHECK(r.root_h == 1);
  }

  SUBCASE("an unreachable subgoal is unsolvable at the root") {
    TaskBuilder tu(2);
    tu.add({.name = "noop", .pre = {0}, .add = {0}});
    tu.set_init({0});
    FactSet sub(2);
    sub.set(1);
    SolverRig rig(tu.task, sub);
    auto r = solve_subproblem(rig.ctx(), initial_state(tu.task), sub);
    CHECK(r.status == SearchResult::Status::Unsolvable);
    CHECK(r.root_h == RelaxedGraph::kInf);
  }

  SUBCASE("the node limit forces a timeout") {
    FactSet sub(3);
    sub.set(2);
    SolverRig rig(tb.task, sub);
    auto r = solve_subproblem(rig.ctx(0, false, 1), init, sub);
    CHECK(r.status == SearchResult::Status::Timeout);
    CHECK(r.expansions == 1);
    CHECK(r.plan.empty());
    (void)a1;
  }

  SUBCASE("two runs produce identical plans") {
    FactSet sub(3);
    sub.set(2);
    SolverRig rig(tb.task, sub);
    auto r1 = solve_subproblem(rig.ctx(), init, sub);
    auto r2 = solve_subproblem(rig.ctx(), init, sub);
    CHECK(r1.plan == r2.plan);
    CHECK(r1.expansions == r2.expansions);
  }
}

TEST_CASE("penalties steer the solver around estimated clashes") {
  TaskBuilder tb(7);
  // fact layout: 0 fuel-a, 1 tool, 2 mid-a, 3 goal, 4..5 mid-b chain, 6 fuel-b
  ActionId a1 = tb.add({.name = "a1", .pre = {0}, .add = {2}, .del = {0, 6}});
  ActionId a2 = tb.add({.name = "a2", .pre = {2}, .add = {3}, .del = {1}});
  ActionId b1 = tb.add({.name = "b1", .pre = {6}, .add = {4}, .del = {0, 6}});
  ActionId b2 = tb.add({.name = "b2", .pre = {4}, .add = {5}});
  ActionId b3 = tb.add({.name = "b3", .pre = {5}, .add = {3}});
  ActionId user = tb.add({.name = "user", .pre = {1}, .del = {1}});
  tb.set_init({0, 1, 6});
  FactSet sub(7);
  sub.set(3);
  State init = initial_state(tb.task);

  SolverRig rig(tb.task, sub, 2);
  rig.schedules[1].actions = {ScheduledAction{user, Rational(0), Rational(0), 1}};
  rig.subplans[1] = {user};

  // unbiased: the two-step route wins
  auto cheap = solve_subproblem(rig.ctx(), init, sub);
  REQUIRE(cheap.status == SearchResult::Status::Solved);
  CHECK(cheap.plan == std::vector<ActionId>{a1, a2});

  // with a heavy penalty on the estimated clash, the clean route wins
  rig.gamma[1] = Rational(100);
  auto clean = solve_subproblem(rig.ctx(), init, sub);
  REQUIRE(clean.status == SearchResult::Status::Solved);
  CHECK(clean.plan == std::vector<ActionId>{b1, b2, b3});
}

TEST_CASE("quality mode prefers the shorter-makespan route") {
  TaskBuilder tb(4);
  ActionId slow = tb.add(
      {.name = "slow", .pre = {0}, .add = {1, 2}, .dur = Rational(10)});
  ActionId fast = tb.add(
      {.name = "fast", .pre = {0}, .add = {1, 3}, .dur = Rational(1)});
  tb.set_init({0});
  FactSet sub(4);
  sub.set(1);
  State init = initial_state(tb.task);
  SolverRig rig(tb.task, sub);

  auto speed = solve_subproblem(rig.ctx(0, false), init, sub);
  CHECK(speed.plan == std::vector<ActionId>{slow});  // id tie-break

  auto quality = solve_subproblem(rig.ctx(0, true), init, sub);
  CHECK(quality.plan == std::vector<ActionId>{fast});  // makespan term decides
}

TEST_CASE("solver plans stay within twice the optimum on transport") {
  const char* dom = R"((define (domain transport)
  (:requirements :strips :typing)
  (:types truck package loc - object)
  (:predicates (at-truck ?t - truck ?l - loc) (at-pkg ?p - package ?l - loc)
               (in ?p - package ?t - truck))
  (:action move
    :parameters (?t - truck ?from ?to - loc)
    :precondition (and (at-truck ?t ?from))
    :effect (and (at-truck ?t ?to) (not (at-truck ?t ?from))))
  (:action load
    :parameters (?p - package ?t - truck ?l - loc)
    :precondition (and (at-pkg ?p ?l) (at-truck ?t ?l))
    :effect (and (in ?p ?t) (not (at-pkg ?p ?l))))
  (:action unload
    :parameters (?p - package ?t - truck ?l - loc)
    :precondition (and (in ?p ?t) (at-truck ?t ?l))
    :effect (and (at-pkg ?p ?l) (not (in ?p ?t)))))
)";
  const char* prob = R"((define (problem transport-pair)
  (:domain transport)
  (:objects t1 - truck p1 p2 - package a b c - loc)
  (:init (at-truck t1 a) (at-pkg p1 a) (at-pkg p2 b))
  (:goal (and (at-pkg p1 c) (at-pkg p2 c))))
)";
  auto d = pddl::parse_domain(dom, "t.pddl");
  auto p = pddl::parse_problem(prob, "t1.pddl");
  GroundTask task = ground(d, p, "t.pddl", "t1.pddl");
  State init = initial_state(task);

  auto oracle = bfs_plan(task, 1 << 20);
  REQUIRE(oracle.status == BfsResult::Status::Solved);

  SolverRig rig(task, task.goal_set());
  auto r = solve_subproblem(rig.ctx(), init, task.goal_set());
  REQUIRE(r.status == SearchResult::Status::Solved);
  CHECK(r.plan.size() <= 2 * oracle.plan.size());

  State end = apply_sequence(task, init, r.plan);
  CHECK(goal_satisfied(task, end));
}
