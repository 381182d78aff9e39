// Micro-benchmark for the two parallel kernels: the pairwise persistent-mutex
// scan and the landmark suppression sweep. Each kernel runs in serial and
// parallel mode on the same synthetic task; the results must agree exactly.
//
// Usage: bench_kernels [lanes] [length]   (defaults 24 x 90)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "subplan/decompose.hpp"
#include "subplan/mutex.hpp"
#include "subplan/search.hpp"
#include "subplan/task.hpp"

namespace {

using namespace subplan;
using Clock = std::chrono::steady_clock;

// Parallel conveyor lanes: lane L owns facts at(L,0..length) and actions
// step(L,i) moving a token forward one cell. A shared `power` fact is an
// invariant condition of every step and is switched off by per-lane `drain`
// actions, so cross-lane mutex pairs exist but same-lane ones dominate.
GroundTask conveyor_task(int lanes, int length) {
  GroundTask task;
  auto fact = [&](const std::string& name) {
    FactId id = static_cast<FactId>(task.fact_names.size());
    task.fact_names.push_back(name);
    task.fact_ids[name] = id;
    return id;
  };
  FactId power = fact("(power)");
  std::vector<std::vector<FactId>> at(lanes);
  for (int l = 0; l < lanes; ++l)
    for (int i = 0; i <= length; ++i)
      at[l].push_back(fact("(at l" + std::to_string(l) + " c" + std::to_string(i) + ")"));

  int nf = static_cast<int>(task.fact_names.size());
  task.init = FactSet(nf);
  task.init.set(power);
  for (int l = 0; l < lanes; ++l) task.init.set(at[l][0]);
  for (int l = 0; l < lanes; ++l) task.goals.push_back(at[l][length]);
  task.temporal = true;

  auto add_action = [&](const std::string& schema, FactId pre, FactId over, FactId add,
                        FactId del, int dur) {
    GroundAction a;
    a.id = static_cast<ActionId>(task.actions.size());
    a.schema = schema;
    a.duration = Rational(dur);
    a.pre_start = FactSet(nf);
    a.pre_overall = FactSet(nf);
    a.pre_end = FactSet(nf);
    a.add_start = FactSet(nf);
    a.add_end = FactSet(nf);
    a.del_start = FactSet(nf);
    a.del_end = FactSet(nf);
    if (pre >= 0) a.pre_start.set(pre);
    if (over >= 0) a.pre_overall.set(over);
    if (add >= 0) a.add_end.set(add);
    if (del >= 0) a.del_start.set(del);
    a.pre_all = a.pre_start;
    a.pre_all.unite(a.pre_overall);
    a.add_all = a.add_end;
    a.del_all = a.del_start;
    task.action_ids[a.name()] = a.id;
    task.actions.push_back(std::move(a));
  };
  for (int l = 0; l < lanes; ++l) {
    for (int i = 0; i < length; ++i)
      add_action("step-l" + std::to_string(l) + "-c" + std::to_string(i), at[l][i], power,
                 at[l][i + 1], at[l][i], 1 + (i % 3));
    add_action("drain-l" + std::to_string(l), at[l][0], -1, -1, power, 1);
  }
  return task;
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void report(const char* kernel, double serial_ms, double parallel_ms, bool agree) {
  std::printf("%-18s %10.1f ms %10.1f ms   %5.2fx   %s\n", kernel, serial_ms,
              parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
              agree ? "agree" : "DISAGREE");
}

}  // namespace

int main(int argc, char** argv) {
  int lanes = argc > 1 ? std::atoi(argv[1]) : 24;
  int length = argc > 2 ? std::atoi(argv[2]) : 90;
  if (lanes < 1 || length < 2) {
    std::fprintf(stderr, "usage: bench_kernels [lanes >= 1] [length >= 2]\n");
    return 1;
  }
  GroundTask task = conveyor_task(lanes, length);
  std::printf("conveyor task: %d facts, %zu actions\n", task.fact_count(),
              task.actions.size());
  std::printf("%-18s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

  bool all_agree = true;
  {
    auto t0 = Clock::now();
    MutexTable serial = persistent_mutexes(task, ExecMode::Serial);
    double serial_ms = ms_since(t0);
    t0 = Clock::now();
    MutexTable parallel = persistent_mutexes(task, ExecMode::Parallel);
    double parallel_ms = ms_since(t0);
    bool agree = serial.entries() == parallel.entries();
    all_agree = all_agree && agree;
    report("mutex-pair-scan", serial_ms, parallel_ms, agree);
    std::printf("  table size: %zu pairs\n", serial.size());
  }
  {
    State init = initial_state(task);
    // Unreduced action set: every reachable fact becomes a suppression
    // candidate, which is what the sweep parallelizes over.
    std::vector<ActionId> all(task.actions.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<ActionId>(i);
    auto t0 = Clock::now();
    std::vector<FactId> serial =
        landmarks(task, all, init, task.goals[0], /*parallel=*/false);
    double serial_ms = ms_since(t0);
    t0 = Clock::now();
    std::vector<FactId> parallel =
        landmarks(task, all, init, task.goals[0], /*parallel=*/true);
    double parallel_ms = ms_since(t0);
    bool agree = serial == parallel;
    all_agree = all_agree && agree;
    report("landmark-sweep", serial_ms, parallel_ms, agree);
    std::printf("  chain length: %zu facts\n", serial.size());
  }
  return all_agree ? 0 : 1;
}
