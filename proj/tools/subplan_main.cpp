// Command-line driver: plan / validate / analyze / bfs / bench.
//
// Exit codes: plan 0 solved, 2 budget exhausted, 3 unsolvable, 1 input error;
// validate 0 valid, 4 invalid, 1 input error; bfs 0 found, 3 unsolvable,
// 2 cap exceeded; analyze and bench 0 unless the input is unusable.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "subplan/bfs.hpp"
#include "subplan/ground.hpp"
#include "subplan/pddl.hpp"
#include "subplan/planfile.hpp"
#include "subplan/resolve.hpp"
#include "subplan/search.hpp"

namespace {

using namespace subplan;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBudget = 2;
constexpr int kExitUnsolvable = 3;
constexpr int kExitInvalid = 4;

struct RunConfig {
  std::string strategy = "ipc4";
  std::string gamma0 = "100";
  std::string xi = "0.1";
  std::string tau = "0.0001";
  int node_limit = 3000;
  int max_iters = 50;
  double time_budget = 1800.0;
  bool quality = false;
  int jobs = 1;
  bool verbose = false;
};

void add_run_flags(CLI::App* cmd, RunConfig* rc) {
  cmd->add_option("--strategy", rc->strategy, "Penalty initialization: ipc4 or new")
      ->envname("SUBPLAN_STRATEGY")
      ->check(CLI::IsMember({"ipc4", "new"}));
  cmd->add_option("--gamma0", rc->gamma0, "Initial penalty weight")
      ->envname("SUBPLAN_GAMMA0");
  cmd->add_option("--xi", rc->xi, "Penalty update rate")->envname("SUBPLAN_XI");
  cmd->add_option("--tau", rc->tau, "Makespan weight in quality mode")
      ->envname("SUBPLAN_TAU");
  cmd->add_option("--node-limit", rc->node_limit, "Node expansions per subproblem solve")
      ->envname("SUBPLAN_NODE_LIMIT")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", rc->max_iters, "Outer iteration budget")
      ->envname("SUBPLAN_MAX_ITERS")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--time-budget", rc->time_budget, "Wall-clock budget in seconds")
      ->envname("SUBPLAN_TIME_BUDGET")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--quality", rc->quality, "Charge makespan in the objectives")
      ->envname("SUBPLAN_QUALITY");
  cmd->add_option("--jobs", rc->jobs, "Worker threads for the parallel kernels")
      ->envname("SUBPLAN_JOBS")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("-v,--verbose", rc->verbose, "Telemetry lines on stderr");
}

ResolveConfig to_resolve_config(const RunConfig& rc) {
  ResolveConfig cfg;
  cfg.strategy = (rc.strategy == "new") ? PenaltyMatrix::Strategy::Fresh
                                        : PenaltyMatrix::Strategy::Ipc4;
  cfg.gamma0 = Rational::parse(rc.gamma0);
  cfg.xi = Rational::parse(rc.xi);
  cfg.tau = Rational::parse(rc.tau);
  cfg.node_limit = rc.node_limit;
  cfg.max_iters = rc.max_iters;
  cfg.time_budget_s = rc.time_budget;
  cfg.quality = rc.quality;
  cfg.jobs = rc.jobs;
  if (rc.verbose) cfg.telemetry = &std::cerr;
  return cfg;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return bool(out);
}

// Loads and grounds a domain/problem pair; prints a diagnostic and returns
// nullopt on any frontend failure.
std::optional<GroundTask> load_task(const std::string& domain_file,
                                    const std::string& problem_file) {
  auto dom_text = read_file(domain_file);
  if (!dom_text) {
    std::cerr << "ERROR " << domain_file << ":0:0 cannot read file\n";
    return std::nullopt;
  }
  auto prob_text = read_file(problem_file);
  if (!prob_text) {
    std::cerr << "ERROR " << problem_file << ":0:0 cannot read file\n";
    return std::nullopt;
  }
  try {
    pddl::Domain dom = pddl::parse_domain(*dom_text, domain_file);
    pddl::Problem prob = pddl::parse_problem(*prob_text, problem_file);
    return ground(dom, prob, domain_file, problem_file);
  } catch (const pddl::FrontendError& e) {
    std::cerr << e.diagnostic() << "\n";
    return std::nullopt;
  }
}

const char* status_name(PlanResult::Status s) {
  switch (s) {
    case PlanResult::Status::Solved: return "solved";
    case PlanResult::Status::Budget: return "budget";
    case PlanResult::Status::Unsolvable: return "unsolvable";
  }
  return "unknown";
}

int cmd_plan(const std::string& domain_file, const std::string& problem_file,
             const std::string& out_file, const std::string& attribution_file,
             const RunConfig& rc) {
  auto task = load_task(domain_file, problem_file);
  if (!task) return kExitError;
  PlanResult res = plan(*task, to_resolve_config(rc));

  Report rep;
  rep.add("status", status_name(res.status));
  if (!res.message.empty()) rep.add("message", res.message);
  rep.add("subgoals", int64_t(res.subproblems.subproblems.size()));
  rep.add("iterations", int64_t(res.iterations));
  rep.add("evaluations", int64_t(res.evaluations));
  rep.add("expansions", res.expansions);
  for (size_t i = 0; i < res.violation_history.size(); ++i)
    rep.add_item("violations", int(i), std::to_string(res.violation_history[i]));
  rep.add("gamma_max", res.penalties.max_entry());
  if (res.resources) {
    const ResourceLoopResult& rl = *res.resources;
    for (size_t r = 0; r < rl.initial_amounts.size(); ++r)
      rep.add_item("resource_initial", int(r),
                   task->resource_names[r] + " " + rl.initial_amounts[r].str());
    for (size_t r = 0; r < rl.run_amounts.size(); ++r)
      rep.add_item("resource_run", int(r),
                   task->resource_names[r] + " " + rl.run_amounts[r].str());
    rep.add("prepended", int64_t(rl.prepended.size()));
  }

  if (res.status == PlanResult::Status::Solved) {
    rep.add("plan_length", int64_t(res.schedule.actions.size()));
    rep.add("makespan", res.schedule.makespan);
    std::string text = write_plan(*task, res.schedule.actions);
    if (!write_file(out_file, text)) {
      std::cerr << "ERROR " << out_file << ":0:0 cannot write file\n";
      return kExitError;
    }
    rep.add("plan_file", out_file);
    if (!attribution_file.empty()) {
      std::vector<int> order = plan_order(res.schedule.actions);
      std::vector<int> sources;
      sources.reserve(order.size());
      for (int i : order) sources.push_back(res.schedule.actions[i].source);
      if (!write_file(attribution_file, write_attribution(sources))) {
        std::cerr << "ERROR " << attribution_file << ":0:0 cannot write file\n";
        return kExitError;
      }
      rep.add("attribution_file", attribution_file);
    }
  }
  std::cout << rep.str();
  switch (res.status) {
    case PlanResult::Status::Solved: return kExitOk;
    case PlanResult::Status::Budget: return kExitBudget;
    case PlanResult::Status::Unsolvable: return kExitUnsolvable;
  }
  return kExitError;
}

int cmd_validate(const std::string& domain_file, const std::string& problem_file,
                 const std::string& plan_file) {
  auto task = load_task(domain_file, problem_file);
  if (!task) return kExitError;
  auto plan_text = read_file(plan_file);
  if (!plan_text) {
    std::cerr << "ERROR " << plan_file << ":0:0 cannot read file\n";
    return kExitError;
  }
  std::vector<ScheduledAction> steps;
  try {
    steps = parse_plan(*task, *plan_text);
  } catch (const PlanParseError& e) {
    std::cerr << "ERROR " << plan_file << ":0:0 " << e.what() << "\n";
    return kExitError;
  }
  MutexTable table = persistent_mutexes(*task);
  ValidationReport v = validate(*task, steps, table);

  Report rep;
  rep.add("verdict", v.verdict ? "valid" : "invalid");
  rep.add("goal", v.goal_ok ? "satisfied" : "unsatisfied");
  rep.add("steps", int64_t(steps.size()));
  Rational makespan(0);
  for (const auto& s : steps) makespan = std::max(makespan, s.end);
  rep.add("makespan", makespan);
  rep.add("conflicts", int64_t(v.conflicts.size()));
  for (size_t i = 0; i < v.conflicts.size(); ++i) {
    const Conflict& c = v.conflicts[i];
    std::string what = "steps " + std::to_string(c.step_a) + "," +
                       std::to_string(c.step_b) + " condition " +
                       std::string(1, c.witness.condition);
    if (c.witness.fact >= 0) what += " on " + task->fact_names[c.witness.fact];
    rep.add_item("conflict", int(i), what);
  }
  rep.add("unsupported", int64_t(v.unsupported.size()));
  for (size_t i = 0; i < v.unsupported.size(); ++i) {
    const Unsupported& u = v.unsupported[i];
    rep.add_item("unsupported", int(i),
                 "step " + std::to_string(u.step) + " missing " + u.what + " at " +
                     u.time.str());
  }
  std::cout << rep.str();
  return v.verdict ? kExitOk : kExitInvalid;
}

int cmd_analyze(const std::string& domain_file, const std::string& problem_file,
                const std::string& plan_file, const std::string& attribution_file) {
  auto task = load_task(domain_file, problem_file);
  if (!task) return kExitError;
  auto plan_text = read_file(plan_file);
  auto attr_text = read_file(attribution_file);
  if (!plan_text || !attr_text) {
    std::cerr << "ERROR " << (plan_text ? attribution_file : plan_file)
              << ":0:0 cannot read file\n";
    return kExitError;
  }
  try {
    std::vector<ScheduledAction> steps = parse_plan(*task, *plan_text);
    std::vector<int> attribution = parse_attribution(*attr_text);
    int stages = 1;
    for (int t : attribution) stages = std::max(stages, t + 1);
    MutexTable table = persistent_mutexes(*task);
    LocalityReport loc = locality(*task, steps, attribution, stages, table);
    Report rep;
    rep.add("steps", int64_t(steps.size()));
    rep.add("stages", int64_t(stages));
    rep.add("n_c", loc.n_c);
    rep.add("n_g_t", loc.n_g_t);
    rep.add("n_g_g", loc.n_g_g);
    rep.add("n_ga_g", loc.n_ga_g);
    rep.add("r_g_t", loc.r_g_t);
    rep.add("r_g_g", loc.r_g_g);
    rep.add("r_ga_g", loc.r_ga_g);
    std::cout << rep.str();
    return kExitOk;
  } catch (const PlanParseError& e) {
    std::cerr << "ERROR " << plan_file << ":0:0 " << e.what() << "\n";
    return kExitError;
  } catch (const PartitionError& e) {
    std::cerr << "ERROR " << attribution_file << ":0:0 " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_bfs(const std::string& domain_file, const std::string& problem_file,
            int64_t state_cap) {
  auto task = load_task(domain_file, problem_file);
  if (!task) return kExitError;
  BfsResult res = bfs_plan(*task, size_t(state_cap));
  Report rep;
  switch (res.status) {
    case BfsResult::Status::Solved: rep.add("status", "solved"); break;
    case BfsResult::Status::Unsolvable: rep.add("status", "unsolvable"); break;
    case BfsResult::Status::CapExceeded: rep.add("status", "cap-exceeded"); break;
  }
  rep.add("states", int64_t(res.states_seen));
  if (res.status == BfsResult::Status::Solved) {
    rep.add("length", int64_t(res.plan.size()));
    for (size_t i = 0; i < res.plan.size(); ++i)
      rep.add_item("step", int(i), task->actions[res.plan[i]].name());
  }
  std::cout << rep.str();
  switch (res.status) {
    case BfsResult::Status::Solved: return kExitOk;
    case BfsResult::Status::Unsolvable: return kExitUnsolvable;
    case BfsResult::Status::CapExceeded: return kExitBudget;
  }
  return kExitError;
}

// Sequentially solves consecutive goal bundles of the given size with the
// unbiased base planner; returns total expansions, or nullopt on any failure.
std::optional<int64_t> bundle_sweep(const GroundTask& task, const MutexTable& table,
                                    int bundle_size, int node_limit) {
  static const std::vector<std::vector<ActionId>> kNoSubplans;
  static const std::vector<TemporalSchedule> kNoSchedules;
  int64_t total = 0;
  State state = initial_state(task);
  for (size_t at = 0; at < task.goals.size(); at += bundle_size) {
    FactSet bundle(task.fact_count());
    for (size_t i = at; i < std::min(task.goals.size(), at + bundle_size); ++i)
      bundle.set(task.goals[i]);
    std::vector<ActionId> relevant = reduce_actions(task, bundle);
    SearchContext ctx{task,       table, relevant, kNoSubplans, kNoSchedules,
                      0,          {},    false,    Rational(1, 10000),
                      node_limit};
    SearchResult r = solve_subproblem(ctx, state, bundle);
    total += r.expansions;
    if (r.status != SearchResult::Status::Solved) return std::nullopt;
    state = apply_sequence(task, state, r.plan);
  }
  return total;
}

struct BenchRow {
  std::string name;
  std::string status = "error";
  int64_t length = 0;
  Rational makespan;
  int iterations = 0;
  int64_t expansions = 0;
  std::vector<std::pair<int, std::optional<int64_t>>> sweep;  // bundle size -> expansions
};

int cmd_bench(const std::string& suite_dir, const RunConfig& rc) {
  namespace fs = std::filesystem;
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(suite_dir, ec)) {
    std::string file = entry.path().filename().string();
    const std::string tag = ".problem.pddl";
    if (file.size() > tag.size() && file.ends_with(tag))
      names.push_back(file.substr(0, file.size() - tag.size()));
  }
  if (ec) {
    std::cerr << "ERROR " << suite_dir << ":0:0 cannot read directory\n";
    return kExitError;
  }
  std::sort(names.begin(), names.end());

  std::vector<BenchRow> rows(names.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < names.size(); i = next.fetch_add(1)) {
      BenchRow& row = rows[i];
      row.name = names[i];
      std::string dom = suite_dir + "/" + names[i] + ".domain.pddl";
      std::string prob = suite_dir + "/" + names[i] + ".problem.pddl";
      auto task = load_task(dom, prob);
      if (!task) continue;
      RunConfig inner = rc;
      inner.jobs = 1;  // worker slots own the parallelism
      inner.verbose = false;
      PlanResult res = plan(*task, to_resolve_config(inner));
      row.status = status_name(res.status);
      row.iterations = res.iterations;
      row.expansions = res.expansions;
      if (res.status == PlanResult::Status::Solved) {
        row.length = int64_t(res.schedule.actions.size());
        row.makespan = res.schedule.makespan;
      }
      if (task->goals.size() == 5) {
        MutexTable table = persistent_mutexes(*task);
        for (int size = 5; size >= 1; --size)
          row.sweep.emplace_back(size,
                                 bundle_sweep(*task, table, size, rc.node_limit));
      }
    }
  };
  int slots = std::max(1, std::min<int>(rc.jobs, int(names.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < slots; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  Report rep;
  rep.add("instances", int64_t(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    const BenchRow& row = rows[i];
    rep.add_item("instance", int(i), row.name);
    rep.add_item("status", int(i), row.status);
    rep.add_item("length", int(i), std::to_string(row.length));
    rep.add_item("makespan", int(i), row.makespan.str());
    rep.add_item("iterations", int(i), std::to_string(row.iterations));
    rep.add_item("expansions", int(i), std::to_string(row.expansions));
    for (const auto& [size, exp] : row.sweep)
      rep.add_item(row.name + "_sweep_expansions", size,
                   exp ? std::to_string(*exp) : "failed");
  }
  std::cout << rep.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal/numeric planner: partition by goal, resolve penalties"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string domain_file, problem_file, plan_file, attribution_file;
  std::string out_file = "plan.soln";
  std::string suite_dir;
  int64_t state_cap = 100000;

  CLI::App* plan_cmd = app.add_subcommand("plan", "Plan and write an IPC plan file");
  plan_cmd->add_option("domain", domain_file, "Domain PDDL file")->required();
  plan_cmd->add_option("problem", problem_file, "Problem PDDL file")->required();
  plan_cmd->add_option("--out", out_file, "Plan file to write");
  plan_cmd->add_option("--attribution", attribution_file,
                       "Also write step-to-subgoal attribution");
  add_run_flags(plan_cmd, &rc);

  CLI::App* val_cmd = app.add_subcommand("validate", "Check a plan file");
  val_cmd->add_option("domain", domain_file, "Domain PDDL file")->required();
  val_cmd->add_option("problem", problem_file, "Problem PDDL file")->required();
  val_cmd->add_option("plan", plan_file, "Plan file to check")->required();

  CLI::App* ana_cmd = app.add_subcommand("analyze", "Mutex locality ratios of a plan");
  ana_cmd->add_option("domain", domain_file, "Domain PDDL file")->required();
  ana_cmd->add_option("problem", problem_file, "Problem PDDL file")->required();
  ana_cmd->add_option("plan", plan_file, "Plan file")->required();
  ana_cmd->add_option("attribution", attribution_file, "Attribution file")->required();

  CLI::App* bfs_cmd = app.add_subcommand("bfs", "Breadth-first oracle");
  bfs_cmd->add_option("domain", domain_file, "Domain PDDL file")->required();
  bfs_cmd->add_option("problem", problem_file, "Problem PDDL file")->required();
  bfs_cmd->add_option("--state-cap", state_cap, "Reachable-state cap")
      ->envname("SUBPLAN_STATE_CAP")
      ->check(CLI::PositiveNumber);

  CLI::App* bench_cmd = app.add_subcommand("bench", "Run a suite directory");
  bench_cmd->add_option("suite", suite_dir, "Directory of instance pairs")->required();
  add_run_flags(bench_cmd, &rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (app.got_subcommand(plan_cmd))
      return cmd_plan(domain_file, problem_file, out_file, attribution_file, rc);
    if (app.got_subcommand(val_cmd))
      return cmd_validate(domain_file, problem_file, plan_file);
    if (app.got_subcommand(ana_cmd))
      return cmd_analyze(domain_file, problem_file, plan_file, attribution_file);
    if (app.got_subcommand(bfs_cmd))
      return cmd_bfs(domain_file, problem_file, state_cap);
    if (app.got_subcommand(bench_cmd)) return cmd_bench(suite_dir, rc);
  } catch (const std::domain_error& e) {  // bad rational in a config knob
    std::cerr << "ERROR <config>:0:0 " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "ERROR <internal>:0:0 " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
