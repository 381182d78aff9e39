#include "subplan/ground.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace subplan {

namespace {

using pddl::TypeError;
using pddl::UnsupportedFeature;

using Tuple = std::vector<std::string>;  // (head, args...)

std::string tuple_name(const Tuple& t) {
  std::string s = "(" + t[0];
  for (size_t i = 1; i < t.size(); ++i) s += " " + t[i];
  return s + ")";
}

struct Symbols {
  std::map<std::string, std::string> type_parent;
  std::map<std::string, std::string> object_type;        // declaration order lost; names sorted later
  std::vector<std::string> object_order;                 // declaration order for enumeration
  std::map<std::string, size_t> predicate_arity;
  std::map<std::string, const pddl::PredicateDef*> predicates;
  std::map<std::string, const pddl::FunctionDef*> functions;

  bool is_subtype(const std::string& t, const std::string& of) const {
    if (of == "object" || t == of) return true;
    std::string cur = t;
    for (int depth = 0; depth < 256; ++depth) {
      auto it = type_parent.find(cur);
      if (it == type_parent.end()) return false;
      cur = it->second;
      if (cur == of) return true;
      if (cur == "object") return false;
    }
    return false;
  }
};

class Grounder {
public:
  Grounder(const pddl::Domain& d, const pddl::Problem& p, std::string dfile,
           std::string pfile)
      : d_(d), p_(p), dfile_(std::move(dfile)), pfile_(std::move(pfile)) {}

  GroundTask run() {
    collect_symbols();
    for (const auto& schema : d_.actions) check_schema(schema);
    enumerate_actions();
    prune_unreachable();
    index_facts_and_resources();
    return build_task();
  }

private:
  struct ProtoAction {
    Tuple key;  // (schema, args...)
    Rational duration;
    std::vector<Tuple> pre[3];  // indexed by When
    std::vector<Tuple> add[2];  // Start, End
    std::vector<Tuple> del[2];
    std::vector<std::tuple<Tuple, Rational, When>> num_pre;
    std::vector<std::tuple<Tuple, Rational, When>> num_eff;  // signed delta
  };

  [[noreturn]] void type_error(const std::string& file, const std::string& msg) const {
    throw TypeError(file, {1, 1}, msg);
  }

  void collect_symbols() {
    for (const auto& t : d_.types) {
      if (t.name == "object") continue;
      sy_.type_parent[t.name] = t.type;
    }
    for (const auto& t : d_.types) {
      if (t.type != "object" && !sy_.type_parent.count(t.type))
        type_error(dfile_, "undeclared parent type " + t.type);
    }
    auto add_object = [&](const pddl::TypedName& o, const std::string& file) {
      if (o.type != "object" && !sy_.type_parent.count(o.type))
        type_error(file, "object " + o.name + " has undeclared type " + o.type);
      if (sy_.object_type.count(o.name))
        type_error(file, "duplicate object " + o.name);
      sy_.object_type[o.name] = o.type;
      sy_.object_order.push_back(o.name);
    };
    for (const auto& c : d_.constants) add_object(c, dfile_);
    for (const auto& o : p_.objects) add_object(o, pfile_);
    for (const auto& pr : d_.predicates) {
      sy_.predicates[pr.name] = &pr;
      sy_.predicate_arity[pr.name] = pr.params.size();
      check_param_types(pr.params, dfile_);
    }
    for (const auto& fn : d_.functions) {
      sy_.functions[fn.name] = &fn;
      check_param_types(fn.params, dfile_);
    }
    for (const auto& s : d_.actions)
      for (const auto& e : s.num_eff) dynamic_fns_.insert(e.ref.fn);
  }

  void check_param_types(const std::vector<pddl::TypedName>& params, const std::string& file) {
    for (const auto& p : params)
      if (p.type != "object" && !sy_.type_parent.count(p.type))
        type_error(file, "undeclared type " + p.type);
  }

  void check_atom(const pddl::Atom& a, const pddl::ActionSchema* scope,
                  const std::string& file) {
    auto it = sy_.predicates.find(a.pred);
    if (it == sy_.predicates.end())
      type_error(file, "undeclared predicate " + a.pred);
    if (a.args.size() != it->second->params.size())
      type_error(file, "predicate " + a.pred + " expects " +
                           std::to_string(it->second->params.size()) + " arguments, got " +
                           std::to_string(a.args.size()));
    for (const auto& arg : a.args) check_term(arg, scope, file);
  }

  void check_ref(const pddl::FunctionRef& r, const pddl::ActionSchema* scope,
                 const std::string& file) {
    auto it = sy_.functions.find(r.fn);
    if (it == sy_.functions.end())
      type_error(file, "undeclared function " + r.fn);
    if (r.args.size() != it->second->params.size())
      type_error(file, "function " + r.fn + " expects " +
                           std::to_string(it->second->params.size()) + " arguments, got " +
                           std::to_string(r.args.size()));
    for (const auto& arg : r.args) check_term(arg, scope, file);
  }

  void check_term(const std::string& term, const pddl::ActionSchema* scope,
                  const std::string& file) {
    if (!term.empty() && term[0] == '?') {
      if (!scope) type_error(file, "variable " + term + " outside an action");
      for (const auto& p : scope->params)
        if (p.name == term) return;
      type_error(file, "unbound variable " + term + " in action " + scope->name);
    } else if (!sy_.object_type.count(term)) {
      type_error(file, "undeclared object " + term);
    }
  }

  void check_schema(const pddl::ActionSchema& s) {
    for (const auto& p : s.params) check_param_types({p}, dfile_);
    auto atoms = [&](const std::vector<pddl::Atom>& v) {
      for (const auto& a : v) check_atom(a, &s, dfile_);
    };
    atoms(s.pre_start);
    atoms(s.pre_overall);
    atoms(s.pre_end);
    atoms(s.add_start);
    atoms(s.add_end);
    atoms(s.del_start);
    atoms(s.del_end);
    for (const auto& n : s.num_pre) check_ref(n.ref, &s, dfile_);
    for (const auto& n : s.num_eff) check_ref(n.ref, &s, dfile_);
    if (s.duration_fn) {
      check_ref(*s.duration_fn, &s, dfile_);
      if (dynamic_fns_.count(s.duration_fn->fn))
        throw UnsupportedFeature(dfile_, {1, 1},
                                 "dynamic duration (function " + s.duration_fn->fn +
                                     " is modified by effects)");
    }
  }

  using Binding = std::map<std::string, std::string>;

  std::string subst(const std::string& term, const Binding& b) const {
    if (!term.empty() && term[0] == '?') return b.at(term);
    return term;
  }

  Tuple ground_atom(const pddl::Atom& a, const Binding& b) const {
    Tuple t{a.pred};
    for (const auto& arg : a.args) t.push_back(subst(arg, b));
    return t;
  }

  Tuple ground_ref(const pddl::FunctionRef& r, const Binding& b) const {
    Tuple t{r.fn};
    for (const auto& arg : r.args) t.push_back(subst(arg, b));
    return t;
  }

  void enumerate_actions() {
    for (const auto& [ref, value] : p_.init_values) {
      check_ref(ref, nullptr, pfile_);
      if (value < Rational(0))
        type_error(pfile_, "negative initial amount for " + ref.fn);
      Tuple key{ref.fn};
      for (auto& a : ref.args) key.push_back(a);
      if (!init_values_.emplace(key, value).second)
        type_error(pfile_, "duplicate initial amount for " + tuple_name(key));
    }
    for (const auto& a : p_.init) check_atom(a, nullptr, pfile_);
    for (const auto& g : p_.goals) check_atom(g, nullptr, pfile_);

    for (const auto& schema : d_.actions) {
      Binding b;
      bind_params(schema, 0, b);
    }
  }

  void bind_params(const pddl::ActionSchema& s, size_t i, Binding& b) {
    if (i == s.params.size()) {
      instantiate(s, b);
      return;
    }
    for (const auto& obj : sy_.object_order) {
      if (!sy_.is_subtype(sy_.object_type.at(obj), s.params[i].type)) continue;
      b[s.params[i].name] = obj;
      bind_params(s, i + 1, b);
    }
    b.erase(s.params[i].name);
  }

  void instantiate(const pddl::ActionSchema& s, const Binding& b) {
    ProtoAction pa;
    pa.key.push_back(s.name);
    for (const auto& p : s.params) pa.key.push_back(b.at(p.name));

    if (s.duration_fn) {
      Tuple key = ground_ref(*s.duration_fn, b);
      auto it = init_values_.find(key);
      if (it == init_values_.end())
        type_error(pfile_, "duration " + tuple_name(key) + " has no initial value");
      pa.duration = it->second;
    } else {
      pa.duration = s.duration_const;
    }
    if (pa.duration < Rational(0))
      type_error(dfile_, "negative duration for action " + s.name);

    auto fill = [&](const std::vector<pddl::Atom>& src, std::vector<Tuple>& dst) {
      for (const auto& a : src) dst.push_back(ground_atom(a, b));
    };
    fill(s.pre_start, pa.pre[0]);
    fill(s.pre_overall, pa.pre[1]);
    fill(s.pre_end, pa.pre[2]);
    fill(s.add_start, pa.add[0]);
    fill(s.add_end, pa.add[1]);
    fill(s.del_start, pa.del[0]);
    fill(s.del_end, pa.del[1]);
    for (const auto& n : s.num_pre)
      pa.num_pre.emplace_back(ground_ref(n.ref, b), n.bound, static_cast<When>(n.when));
    for (const auto& n : s.num_eff)
      pa.num_eff.emplace_back(ground_ref(n.ref, b),
                              n.increase ? n.amount : -n.amount,
                              static_cast<When>(n.when));

    // Same-instant add/delete of one fact resolves to delete under the
    // Result semantics; canonicalize so add and delete buckets stay disjoint.
    for (int t = 0; t < 2; ++t) {
      std::set<Tuple> dels(pa.del[t].begin(), pa.del[t].end());
      std::erase_if(pa.add[t], [&](const Tuple& a) { return dels.count(a); });
    }
    for (int b2 = 0; b2 < 3; ++b2) dedup(pa.pre[b2]);
    for (int b2 = 0; b2 < 2; ++b2) {
      dedup(pa.add[b2]);
      dedup(pa.del[b2]);
    }
    protos_.push_back(std::move(pa));
  }

  static void dedup(std::vector<Tuple>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  void prune_unreachable() {
    std::set<Tuple> achievable;
    for (const auto& a : p_.init) {
      Tuple t{a.pred};
      for (auto& arg : a.args) t.push_back(arg);
      achievable.insert(t);
    }
    for (const auto& pa : protos_)
      for (int t = 0; t < 2; ++t)
        for (const auto& f : pa.add[t]) achievable.insert(f);

    std::vector<ProtoAction> kept;
    for (auto& pa : protos_) {
      bool ok = true;
      for (int t = 0; t < 3 && ok; ++t)
        for (const auto& f : pa.pre[t])
          if (!achievable.count(f)) {
            ok = false;
            break;
          }
      if (ok) kept.push_back(std::move(pa));
    }
    protos_ = std::move(kept);
  }

  void index_facts_and_resources() {
    std::set<Tuple> facts;
    for (const auto& a : p_.init) {
      Tuple t{a.pred};
      for (auto& arg : a.args) t.push_back(arg);
      facts.insert(t);
    }
    for (const auto& g : p_.goals) {
      Tuple t{g.pred};
      for (auto& arg : g.args) t.push_back(arg);
      facts.insert(t);
    }
    for (const auto& pa : protos_) {
      for (int t = 0; t < 3; ++t)
        for (const auto& f : pa.pre[t]) facts.insert(f);
      for (int t = 0; t < 2; ++t) {
        for (const auto& f : pa.add[t]) facts.insert(f);
        for (const auto& f : pa.del[t]) facts.insert(f);
      }
    }
    fact_tuples_.assign(facts.begin(), facts.end());

    std::set<Tuple> resources;
    for (const auto& pa : protos_) {
      for (const auto& [ref, bound, when] : pa.num_pre) resources.insert(ref);
      for (const auto& [ref, delta, when] : pa.num_eff) resources.insert(ref);
    }
    resource_tuples_.assign(resources.begin(), resources.end());
  }

  GroundTask build_task() {
    GroundTask task;
    task.temporal = std::any_of(d_.actions.begin(), d_.actions.end(),
                                [](const auto& s) { return s.durative; });
    task.metric_total_time = p_.metric_total_time;

    std::map<Tuple, FactId> fact_id;
    for (const auto& t : fact_tuples_) {
      fact_id[t] = static_cast<FactId>(task.fact_names.size());
      task.fact_names.push_back(tuple_name(t));
    }
    std::map<Tuple, ResourceId> res_id;
    for (const auto& t : resource_tuples_) {
      res_id[t] = static_cast<ResourceId>(task.resource_names.size());
      task.resource_names.push_back(tuple_name(t));
    }
    for (size_t i = 0; i < task.fact_names.size(); ++i)
      task.fact_ids[task.fact_names[i]] = static_cast<FactId>(i);

    int nf = static_cast<int>(task.fact_names.size());
    task.init = FactSet(nf);
    for (const auto& a : p_.init) {
      Tuple t{a.pred};
      for (auto& arg : a.args) t.push_back(arg);
      task.init.set(fact_id.at(t));
    }
    task.init_amounts.assign(task.resource_names.size(), Rational(0));
    for (const auto& [key, value] : init_values_) {
      auto it = res_id.find(key);
      if (it != res_id.end()) task.init_amounts[it->second] = value;
    }
    for (const auto& g : p_.goals) {
      Tuple t{g.pred};
      for (auto& arg : g.args) t.push_back(arg);
      task.goals.push_back(fact_id.at(t));
    }

    std::sort(protos_.begin(), protos_.end(),
              [](const ProtoAction& a, const ProtoAction& b) { return a.key < b.key; });
    for (const auto& pa : protos_) {
      GroundAction ga;
      ga.id = static_cast<ActionId>(task.actions.size());
      ga.schema = pa.key[0];
      ga.args.assign(pa.key.begin() + 1, pa.key.end());
      ga.duration = pa.duration;
      auto to_set = [&](const std::vector<Tuple>& src) {
        FactSet fs(nf);
        for (const auto& t : src) fs.set(fact_id.at(t));
        return fs;
      };
      ga.pre_start = to_set(pa.pre[0]);
      ga.pre_overall = to_set(pa.pre[1]);
      ga.pre_end = to_set(pa.pre[2]);
      ga.add_start = to_set(pa.add[0]);
      ga.add_end = to_set(pa.add[1]);
      ga.del_start = to_set(pa.del[0]);
      ga.del_end = to_set(pa.del[1]);
      for (const auto& [ref, bound, when] : pa.num_pre)
        ga.num_pre.push_back({res_id.at(ref), bound, when});
      for (const auto& [ref, delta, when] : pa.num_eff)
        ga.num_eff.push_back({res_id.at(ref), delta, when});
      ga.pre_all = ga.pre_start;
      ga.pre_all.unite(ga.pre_overall);
      ga.pre_all.unite(ga.pre_end);
      ga.add_all = ga.add_start;
      ga.add_all.unite(ga.add_end);
      ga.del_all = ga.del_start;
      ga.del_all.unite(ga.del_end);
      if (task.action_ids.count(ga.name()))
        type_error(dfile_, "duplicate action " + ga.name());
      task.action_ids[ga.name()] = ga.id;
      task.actions.push_back(std::move(ga));
    }
    return task;
  }

  const pddl::Domain& d_;
  const pddl::Problem& p_;
  std::string dfile_, pfile_;
  Symbols sy_;
  std::set<std::string> dynamic_fns_;
  std::map<Tuple, Rational> init_values_;
  std::vector<ProtoAction> protos_;
  std::vector<Tuple> fact_tuples_;
  std::vector<Tuple> resource_tuples_;
};

}  // namespace

GroundTask ground(const pddl::Domain& domain, const pddl::Problem& problem,
                  const std::string& domain_file, const std::string& problem_file) {
  Grounder g(domain, problem, domain_file, problem_file);
  return g.run();
}

}  // namespace subplan
