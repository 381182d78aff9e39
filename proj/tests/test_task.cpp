#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "subplan/bfs.hpp"
#include "subplan/ground.hpp"
#include "subplan/pddl.hpp"
#include "testutil.hpp"

using namespace subplan;
using testutil::TaskBuilder;

TEST_CASE("apply follows the result equation, inapplicable is a no-op") {
  TaskBuilder tb(3);
  ActionId a = tb.add({.name = "a", .pre = {0}, .add = {1}, .del = {}});
  ActionId b = tb.add({.name = "b", .pre = {2}, .add = {0}, .del = {}});
  tb.set_init({0});
  State s = initial_state(tb.task);

  State s1 = apply(s, tb.task.actions[a]);
  CHECK(s1.facts.test(0));
  CHECK(s1.facts.test(1));

  State s2 = apply(s, tb.task.actions[b]);  // precondition f2 missing
  CHECK(s2 == s);

  // No-op applications are idempotent.
  CHECK(apply(s2, tb.task.actions[b]) == s2);
}

TEST_CASE("deletes win over adds within one application") {
  TaskBuilder tb(2);
  ActionId a = tb.add({.name = "flip", .pre = {0}, .add = {1}, .del = {0}});
  tb.set_init({0});
  State s = apply(initial_state(tb.task), tb.task.actions[a]);
  CHECK_FALSE(s.facts.test(0));
  CHECK(s.facts.test(1));
}

TEST_CASE("numeric effects and underflow") {
  TaskBuilder tb(1, 1);
  ActionId burn = tb.add({.name = "burn",
                          .pre = {},
                          .add = {0},
                          .npre = {{0, Rational(3), When::Start}},
                          .neff = {{0, Rational(-3), When::Start}}});
  tb.set_amount(0, Rational(5));
  State s = initial_state(tb.task);
  State s1 = apply(s, tb.task.actions[burn]);
  CHECK(s1.amounts[0] == Rational(2));

  // 2 < 3: numeric precondition fails, no-op branch.
  State s2 = apply(s1, tb.task.actions[burn]);
  CHECK(s2 == s1);

  // An applicable action whose decrease would go negative signals an error.
  TaskBuilder tb2(1, 1);
  ActionId leak = tb2.add({.name = "leak", .neff = {{0, Rational(-4), When::Start}}});
  tb2.set_amount(0, Rational(2));
  CHECK(would_underflow(initial_state(tb2.task), tb2.task.actions[leak]));
  CHECK_THROWS_AS(apply(initial_state(tb2.task), tb2.task.actions[leak]),
                  NumericUnderflow);
}

TEST_CASE("apply_sequence folds left and the empty plan is identity") {
  TaskBuilder tb(3);
  ActionId a = tb.add({.name = "a", .pre = {0}, .add = {1}});
  ActionId b = tb.add({.name = "b", .pre = {1}, .add = {2}, .del = {0}});
  tb.set_init({0});
  tb.set_goals({2});
  State s0 = initial_state(tb.task);

  CHECK(apply_sequence(tb.task, s0, std::vector<ActionId>{}) == s0);

  std::vector<ActionId> plan{a, b};
  State end = apply_sequence(tb.task, s0, plan);
  CHECK(end.facts.test(1));
  CHECK(end.facts.test(2));
  CHECK_FALSE(end.facts.test(0));
  CHECK(goal_satisfied(tb.task, end));
  CHECK_FALSE(goal_satisfied(tb.task, s0));
}

TEST_CASE("concatenated plans chain through intermediate states") {
  std::mt19937 rng(7);
  for (int round = 0; round < 50; ++round) {
    GroundTask task = testutil::random_strips(rng, 10, 8);
    auto plan = testutil::random_walk(rng, task, 12);
    size_t cut = plan.empty() ? 0 : rng() % plan.size();
    std::span<const ActionId> whole(plan);
    State direct = apply_sequence(task, initial_state(task), whole);
    State mid = apply_sequence(task, initial_state(task), whole.subspan(0, cut));
    State chained = apply_sequence(task, mid, whole.subspan(cut));
    CHECK(direct == chained);
  }
}

TEST_CASE("transport plan reaches the BFS oracle goal state") {
  const char* dom = R"((define (domain transport)
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
  const char* prob = R"((define (problem two) (:domain transport)
    (:objects t1 - truck p1 p2 - package a b c - loc)
    (:init (at-truck t1 a) (at-pkg p1 a) (at-pkg p2 b))
    (:goal (and (at-pkg p1 c) (at-pkg p2 c))))
  )";
  auto task = ground(pddl::parse_domain(dom, "d"), pddl::parse_problem(prob, "p"), "d", "p");

  auto oracle = bfs_plan(task, 100000);
  REQUIRE(oracle.status == BfsResult::Status::Solved);
  // load p1, drive a->b, load p2, drive b->c, unload both: 6 steps.
  CHECK(oracle.plan.size() == 6);
  State end = apply_sequence(task, initial_state(task), oracle.plan);
  CHECK(goal_satisfied(task, end));

  // A hand-written 6-step plan reaches exactly the same end state.
  std::vector<ActionId> hand{
      task.action_ids.at("(load p1 t1 a)"), task.action_ids.at("(move t1 a b)"),
      task.action_ids.at("(load p2 t1 b)"), task.action_ids.at("(move t1 b c)"),
      task.action_ids.at("(unload p1 t1 c)"), task.action_ids.at("(unload p2 t1 c)")};
  State hand_end = apply_sequence(task, initial_state(task), hand);
  CHECK(goal_satisfied(task, hand_end));
  CHECK(hand_end.facts == end.facts);
}

TEST_CASE("bfs reports unsolvable and cap exhaustion") {
  TaskBuilder tb(3);
  tb.add({.name = "a", .pre = {0}, .add = {1}});
  tb.set_init({0});
  tb.set_goals({2});
  auto r = bfs_plan(tb.task, 1000);
  CHECK(r.status == BfsResult::Status::Unsolvable);

  // Binary counter on 12 bits exceeds a tiny cap.
  TaskBuilder big(12);
  for (int i = 0; i < 12; ++i) big.add({.name = "set" + std::to_string(i), .add = {i}});
  big.set_goals({11});
  auto capped = bfs_plan(big.task, 64);
  CHECK(capped.status == BfsResult::Status::CapExceeded);
}

TEST_CASE("random-state invariants hold") {
  std::mt19937 rng(23);
  for (int round = 0; round < 100; ++round) {
    GroundTask task = testutil::random_strips(rng, 8, 6);
    State s = initial_state(task);
    for (const auto& a : task.actions) {
      State t = apply(s, a);
      if (!applicable(s, a)) {
        CHECK(t == s);
      } else {
        // adds present unless deleted, deletes absent
        bool ok = true;
        a.add_all.for_each([&](FactId f) {
          if (!a.del_all.test(f) && !t.facts.test(f)) ok = false;
        });
        a.del_all.for_each([&](FactId f) {
          if (t.facts.test(f)) ok = false;
        });
        CHECK(ok);
      }
    }
  }
}
