#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "subplan/ground.hpp"
#include "subplan/pddl.hpp"

using namespace subplan;

namespace {

const char* kMiniDomain = R"((define (domain mini)
  (:requirements :strips :typing)
  (:types loc - object)
  (:predicates (at ?l - loc) (visited ?l - loc))
  (:action go
    :parameters (?from ?to - loc)
    :precondition (and (at ?from))
    :effect (and (at ?to) (visited ?to) (not (at ?from)))))
)";

const char* kMiniProblem = R"((define (problem mini-1)
  (:domain mini)
  (:objects a b - loc)
  (:init (at a))
  (:goal (and (visited b) (at b))))
)";

const char* kTransportDomain = R"((define (domain transport)
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

const char* kTransportProblem = R"((define (problem transport-mini)
  (:domain transport)
  (:objects t1 - truck p1 - package a b - loc)
  (:init (at-truck t1 a) (at-pkg p1 a))
  (:goal (and (at-pkg p1 b))))
)";

}  // namespace

TEST_CASE("minimal domain parses to the expected model") {
  auto d = pddl::parse_domain(kMiniDomain, "mini.pddl");
  CHECK(d.name == "mini");
  CHECK(d.predicates.size() == 2);
  CHECK(d.actions.size() == 1);
  const auto& go = d.actions[0];
  CHECK(go.name == "go");
  CHECK_FALSE(go.durative);
  CHECK(go.params.size() == 2);
  CHECK(go.pre_start == std::vector<pddl::Atom>{{"at", {"?from"}}});
  CHECK(go.add_start.size() == 2);
  CHECK(go.del_start == std::vector<pddl::Atom>{{"at", {"?from"}}});
}

TEST_CASE("durative action with constant duration") {
  const char* text = R"((define (domain dur)
    (:predicates (p) (q))
    (:durative-action wait
      :parameters ()
      :duration (= ?duration 3)
      :condition (and (at start (p)) (over all (p)))
      :effect (and (at end (q)))))
  )";
  auto d = pddl::parse_domain(text, "dur.pddl");
  const auto& w = d.actions[0];
  CHECK(w.durative);
  CHECK(w.duration_const == Rational(3));
  CHECK(w.pre_start.size() == 1);
  CHECK(w.pre_overall.size() == 1);
  CHECK(w.add_end.size() == 1);
  CHECK(w.add_start.empty());
}

TEST_CASE("quantifiers and disjunction are rejected by name") {
  const char* forall_text = R"((define (domain bad)
    (:predicates (p ?x) (q))
    (:action a :parameters (?x)
      :precondition (forall (?y) (p ?y))
      :effect (q)))
  )";
  CHECK_THROWS_WITH_AS(pddl::parse_domain(forall_text, "bad.pddl"),
                       doctest::Contains("forall"), pddl::UnsupportedFeature);

  const char* or_goal = R"((define (problem bad-1) (:domain bad)
    (:objects o) (:init) (:goal (or (p o) (q))))
  )";
  CHECK_THROWS_WITH_AS(pddl::parse_problem(or_goal, "bad1.pddl"),
                       doctest::Contains("or"), pddl::UnsupportedFeature);

  const char* neg_pre = R"((define (domain bad2)
    (:predicates (p) (q))
    (:action a :parameters () :precondition (not (p)) :effect (q)))
  )";
  CHECK_THROWS_AS(pddl::parse_domain(neg_pre, "bad2.pddl"), pddl::UnsupportedFeature);

  const char* til = R"((define (problem bad-3) (:domain x)
    (:objects) (:init (at 5 (p))) (:goal (and)))
  )";
  CHECK_THROWS_WITH_AS(pddl::parse_problem(til, "bad3.pddl"),
                       doctest::Contains("timed initial literal"),
                       pddl::UnsupportedFeature);
}

TEST_CASE("goal conjunct order and numeric init are preserved") {
  const char* prob = R"((define (problem p) (:domain d)
    (:objects t1)
    (:init (a t1) (= (fuel t1) 5))
    (:goal (and (c t1) (a t1) (b t1))))
  )";
  auto p = pddl::parse_problem(prob, "p.pddl");
  REQUIRE(p.goals.size() == 3);
  CHECK(p.goals[0].pred == "c");
  CHECK(p.goals[1].pred == "a");
  CHECK(p.goals[2].pred == "b");
  REQUIRE(p.init_values.size() == 1);
  CHECK(p.init_values[0].first == pddl::FunctionRef{"fuel", {"t1"}});
  CHECK(p.init_values[0].second == Rational(5));
}

TEST_CASE("parse errors carry file, line and column") {
  try {
    pddl::parse_domain("(define (domain d)\n  (:predicates (p))\n  (:bogus))", "d.pddl");
    FAIL("expected ParseError");
  } catch (const pddl::ParseError& e) {
    CHECK(e.file() == "d.pddl");
    CHECK(e.pos().line == 3);
    std::string diag = e.diagnostic();
    CHECK(diag.substr(0, 6) == "ERROR ");
    CHECK(diag.find("d.pddl:3:") != std::string::npos);
  }
}

TEST_CASE("pretty-print round-trips structurally") {
  auto d = pddl::parse_domain(kTransportDomain, "t.pddl");
  auto p = pddl::parse_problem(kTransportProblem, "t1.pddl");
  auto d2 = pddl::parse_domain(pddl::print_domain(d), "t.pddl");
  auto p2 = pddl::parse_problem(pddl::print_problem(p), "t1.pddl");
  CHECK(d == d2);
  CHECK(p == p2);

  const char* dur = R"((define (domain dd)
    (:types loc - object)
    (:functions (dist ?a ?b - loc))
    (:predicates (at ?l - loc) (fuel-low))
    (:durative-action fly
      :parameters (?a ?b - loc)
      :duration (= ?duration (dist ?a ?b))
      :condition (and (at start (at ?a)) (at start (>= (dist ?a ?b) 1)))
      :effect (and (at start (not (at ?a))) (at end (at ?b))
                   (at end (decrease (dist ?a ?b) 1)))))
  )";
  auto dd = pddl::parse_domain(dur, "dd.pddl");
  auto dd2 = pddl::parse_domain(pddl::print_domain(dd), "dd.pddl");
  CHECK(dd == dd2);
}

TEST_CASE("transport grounding matches hand enumeration") {
  auto d = pddl::parse_domain(kTransportDomain, "t.pddl");
  auto p = pddl::parse_problem(kTransportProblem, "t1.pddl");
  auto task = ground(d, p, "t.pddl", "t1.pddl");

  // 1 truck x 2 locations: move 2*2=4 (self-moves included), load 2, unload 2.
  CHECK(task.action_count() == 8);
  // at-truck{a,b}, at-pkg{a,b}, in(p1,t1).
  CHECK(task.fact_count() == 5);
  CHECK(task.goals.size() == 1);
  CHECK(task.fact_names[task.goals[0]] == "(at-pkg p1 b)");

  // Lexicographic ids: fact and action tables sorted.
  CHECK(std::is_sorted(task.fact_names.begin(), task.fact_names.end()));
  std::vector<std::pair<std::string, std::vector<std::string>>> keys;
  for (const auto& a : task.actions) keys.emplace_back(a.schema, a.args);
  CHECK(std::is_sorted(keys.begin(), keys.end()));

  // Grounding twice yields identical tables.
  auto task2 = ground(d, p, "t.pddl", "t1.pddl");
  CHECK(task.fact_names == task2.fact_names);
  std::vector<std::string> names, names2;
  for (const auto& a : task.actions) names.push_back(a.name());
  for (const auto& a : task2.actions) names2.push_back(a.name());
  CHECK(names == names2);
}

TEST_CASE("statically unreachable actions are pruned") {
  const char* dom = R"((define (domain pr)
    (:predicates (p) (q) (r) (never))
    (:action good :parameters () :precondition (p) :effect (q))
    (:action dead :parameters () :precondition (never) :effect (r)))
  )";
  const char* prob = R"((define (problem pr-1) (:domain pr)
    (:init (p)) (:goal (and (q))))
  )";
  auto task = ground(pddl::parse_domain(dom, "d"), pddl::parse_problem(prob, "p"), "d", "p");
  CHECK(task.action_count() == 1);
  CHECK(task.actions[0].schema == "good");
  // `never` and `r` are referenced only by the pruned action.
  CHECK(task.fact_count() == 2);
}

TEST_CASE("grounding validates symbols") {
  const char* dom = R"((define (domain ty)
    (:types truck - object)
    (:predicates (at ?t - truck))
    (:action a :parameters (?t - truck) :precondition (at ?t) :effect (at ?t)))
  )";
  auto d = pddl::parse_domain(dom, "d");
  auto p_bad = pddl::parse_problem(
      "(define (problem x) (:domain ty) (:objects o1 - truck) (:init (at o1 o1)) (:goal (and)))",
      "p");
  CHECK_THROWS_AS(ground(d, p_bad, "d", "p"), pddl::TypeError);

  auto p_unknown = pddl::parse_problem(
      "(define (problem x) (:domain ty) (:objects o1 - rover) (:init) (:goal (and)))", "p");
  CHECK_THROWS_AS(ground(d, p_unknown, "d", "p"), pddl::TypeError);
}

TEST_CASE("durations ground from static functions") {
  const char* dom = R"((define (domain dd)
    (:types loc - object)
    (:functions (dist ?a ?b - loc))
    (:predicates (at ?l - loc))
    (:durative-action go
      :parameters (?a ?b - loc)
      :duration (= ?duration (dist ?a ?b))
      :condition (and (at start (at ?a)))
      :effect (and (at start (not (at ?a))) (at end (at ?b)))))
  )";
  const char* prob = R"((define (problem dd-1) (:domain dd)
    (:objects x y - loc)
    (:init (at x) (= (dist x y) 7) (= (dist y x) 7)
           (= (dist x x) 1) (= (dist y y) 1))
    (:goal (and (at y))))
  )";
  auto task = ground(pddl::parse_domain(dom, "d"), pddl::parse_problem(prob, "p"), "d", "p");
  CHECK(task.temporal);
  ActionId go = task.action_ids.at("(go x y)");
  CHECK(task.actions[go].duration == Rational(7));
  // dist is static: evaluated at ground time, not tracked as a resource.
  CHECK(task.resource_count() == 0);
}
