#include "subplan/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace subplan::pddl {

namespace {

struct Token {
  enum Kind { LParen, RParen, Symbol, Eof } kind;
  std::string text;
  SourcePos pos;
};

class Lexer {
public:
  Lexer(const std::string& text, std::string file)
      : text_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      SourcePos pos{line_, col_};
      if (i_ >= text_.size()) {
        out.push_back({Token::Eof, "", pos});
        break;
      }
      char c = text_[i_];
      if (c == '(') {
        advance();
        out.push_back({Token::LParen, "(", pos});
      } else if (c == ')') {
        advance();
        out.push_back({Token::RParen, ")", pos});
      } else {
        std::string sym;
        while (i_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[i_])) &&
               text_[i_] != '(' && text_[i_] != ')' && text_[i_] != ';') {
          sym.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text_[i_]))));
          advance();
        }
        out.push_back({Token::Symbol, sym, pos});
      }
    }
    return out;
  }

private:
  void skip_space() {
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (c == ';') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  const std::string& text_;
  std::string file_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct SExpr {
  bool is_list = false;
  std::string sym;
  std::vector<SExpr> items;
  SourcePos pos;

  const std::string& head() const {
    static const std::string empty;
    if (!is_list || items.empty() || items[0].is_list) return empty;
    return items[0].sym;
  }
};

class Reader {
public:
  Reader(std::vector<Token> tokens, std::string file)
      : tokens_(std::move(tokens)), file_(std::move(file)) {}

  SExpr read() {
    SExpr e = read_one();
    if (peek().kind != Token::Eof)
      throw ParseError(file_, peek().pos, "trailing input after top-level form");
    return e;
  }

private:
  const Token& peek() const { return tokens_[i_]; }

  SExpr read_one() {
    const Token& t = tokens_[i_];
    if (t.kind == Token::Eof) throw ParseError(file_, t.pos, "unexpected end of input");
    if (t.kind == Token::RParen) throw ParseError(file_, t.pos, "unexpected ')'");
    if (t.kind == Token::Symbol) {
      ++i_;
      SExpr e;
      e.sym = t.text;
      e.pos = t.pos;
      return e;
    }
    ++i_;  // consume '('
    SExpr e;
    e.is_list = true;
    e.pos = t.pos;
    while (true) {
      if (peek().kind == Token::Eof)
        throw ParseError(file_, peek().pos, "missing ')'");
      if (peek().kind == Token::RParen) {
        ++i_;
        return e;
      }
      e.items.push_back(read_one());
    }
  }

  std::vector<Token> tokens_;
  std::string file_;
  size_t i_ = 0;
};

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  bool digit = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digit = true;
    } else if (s[i] != '.' && s[i] != '/') {
      return false;
    }
  }
  return digit;
}

class ModelBuilder {
public:
  explicit ModelBuilder(std::string file) : file_(std::move(file)) {}

  Domain domain(const SExpr& root) {
    expect_define(root, "domain");
    Domain d;
    d.name = root.items[1].items[1].sym;
    for (size_t i = 2; i < root.items.size(); ++i) {
      const SExpr& sec = root.items[i];
      const std::string& h = sec.head();
      if (h == ":requirements") {
        for (size_t j = 1; j < sec.items.size(); ++j) d.requirements.push_back(sym(sec.items[j]));
      } else if (h == ":types") {
        d.types = typed_list(sec, 1);
      } else if (h == ":constants") {
        d.constants = typed_list(sec, 1);
      } else if (h == ":predicates") {
        for (size_t j = 1; j < sec.items.size(); ++j) {
          const SExpr& p = sec.items[j];
          if (!p.is_list || p.items.empty())
            throw ParseError(file_, p.pos, "malformed predicate declaration");
          d.predicates.push_back({sym(p.items[0]), typed_list(p, 1)});
        }
      } else if (h == ":functions") {
        for (size_t j = 1; j < sec.items.size(); ++j) {
          const SExpr& f = sec.items[j];
          if (!f.is_list || f.items.empty())
            throw ParseError(file_, f.pos, "malformed function declaration");
          d.functions.push_back({sym(f.items[0]), typed_list(f, 1)});
        }
      } else if (h == ":action") {
        d.actions.push_back(action(sec, false));
      } else if (h == ":durative-action") {
        d.actions.push_back(action(sec, true));
      } else if (h == ":derived") {
        throw UnsupportedFeature(file_, sec.pos, "derived predicates (:derived)");
      } else {
        throw ParseError(file_, sec.pos, "unknown domain section " + h);
      }
    }
    return d;
  }

  Problem problem(const SExpr& root) {
    expect_define(root, "problem");
    Problem p;
    p.name = root.items[1].items[1].sym;
    for (size_t i = 2; i < root.items.size(); ++i) {
      const SExpr& sec = root.items[i];
      const std::string& h = sec.head();
      if (h == ":domain") {
        p.domain_name = sym(sec.items[1]);
      } else if (h == ":objects") {
        p.objects = typed_list(sec, 1);
      } else if (h == ":init") {
        for (size_t j = 1; j < sec.items.size(); ++j) init_entry(sec.items[j], p);
      } else if (h == ":goal") {
        if (sec.items.size() != 2) throw ParseError(file_, sec.pos, "malformed :goal");
        goal(sec.items[1], p.goals);
      } else if (h == ":metric") {
        metric(sec, p);
      } else if (h == ":requirements") {
        // tolerated in problem files, carried by the domain
      } else {
        throw ParseError(file_, sec.pos, "unknown problem section " + h);
      }
    }
    return p;
  }

private:
  void expect_define(const SExpr& root, const std::string& kind) {
    if (!root.is_list || root.items.size() < 2 || root.head() != "define" ||
        !root.items[1].is_list || root.items[1].items.size() != 2 ||
        root.items[1].head() != kind)
      throw ParseError(file_, root.pos, "expected (define (" + kind + " <name>) ...)");
  }

  std::string sym(const SExpr& e) {
    if (e.is_list) throw ParseError(file_, e.pos, "expected a symbol");
    return e.sym;
  }

  std::vector<TypedName> typed_list(const SExpr& e, size_t from) {
    std::vector<TypedName> out;
    std::vector<std::string> pending;
    for (size_t i = from; i < e.items.size(); ++i) {
      const std::string& s = sym(e.items[i]);
      if (s == "-") {
        if (i + 1 >= e.items.size())
          throw ParseError(file_, e.items[i].pos, "dangling '-' in typed list");
        const SExpr& ty = e.items[++i];
        if (ty.is_list) {
          if (ty.head() == "either")
            throw UnsupportedFeature(file_, ty.pos, "either types");
          throw ParseError(file_, ty.pos, "expected a type name");
        }
        for (auto& n : pending) out.push_back({n, ty.sym});
        pending.clear();
      } else {
        pending.push_back(s);
      }
    }
    for (auto& n : pending) out.push_back({n, "object"});
    return out;
  }

  Atom atom(const SExpr& e) {
    if (!e.is_list || e.items.empty() || e.items[0].is_list)
      throw ParseError(file_, e.pos, "expected an atom");
    Atom a;
    a.pred = e.items[0].sym;
    for (size_t i = 1; i < e.items.size(); ++i) a.args.push_back(sym(e.items[i]));
    return a;
  }

  FunctionRef fun_ref(const SExpr& e) {
    Atom a = atom(e);
    return FunctionRef{a.pred, a.args};
  }

  Rational number(const SExpr& e) {
    if (e.is_list || !is_number(e.sym))
      throw ParseError(file_, e.pos, "expected a numeric constant");
    return Rational::parse(e.sym);
  }

  void reject_adl(const SExpr& e, const std::string& where) {
    const std::string& h = e.head();
    if (h == "forall") throw UnsupportedFeature(file_, e.pos, "forall in " + where);
    if (h == "exists") throw UnsupportedFeature(file_, e.pos, "exists in " + where);
    if (h == "or") throw UnsupportedFeature(file_, e.pos, "or in " + where);
    if (h == "imply") throw UnsupportedFeature(file_, e.pos, "imply in " + where);
    if (h == "when") throw UnsupportedFeature(file_, e.pos, "conditional effect (when) in " + where);
    if (h == "preference") throw UnsupportedFeature(file_, e.pos, "preference in " + where);
    if (h == "=" && where != "duration")
      throw UnsupportedFeature(file_, e.pos, "equality condition in " + where);
  }

  // Plain condition: conjunction of atoms and (>= <fn> <const>) bounds.
  void condition(const SExpr& e, When when, std::vector<Atom>& atoms,
                 std::vector<NumericCondition>& nums) {
    if (!e.is_list) throw ParseError(file_, e.pos, "expected a condition");
    if (e.items.empty()) return;  // () = empty condition
    const std::string& h = e.head();
    if (h == "and") {
      for (size_t i = 1; i < e.items.size(); ++i) condition(e.items[i], when, atoms, nums);
      return;
    }
    reject_adl(e, "condition");
    if (h == "not")
      throw UnsupportedFeature(file_, e.pos, "negative precondition (not)");
    if (h == ">=") {
      if (e.items.size() != 3)
        throw ParseError(file_, e.pos, "malformed numeric condition");
      nums.push_back({fun_ref(e.items[1]), number(e.items[2]), when});
      return;
    }
    if (h == "<=" || h == "<" || h == ">")
      throw UnsupportedFeature(file_, e.pos, "numeric comparison " + h + " (only >= is accepted)");
    atoms.push_back(atom(e));
  }

  // Plain effect: conjunction of add/delete literals and constant increase/decrease.
  void effect(const SExpr& e, When when, ActionSchema& s) {
    if (!e.is_list) throw ParseError(file_, e.pos, "expected an effect");
    if (e.items.empty()) return;
    const std::string& h = e.head();
    if (h == "and") {
      for (size_t i = 1; i < e.items.size(); ++i) effect(e.items[i], when, s);
      return;
    }
    reject_adl(e, "effect");
    if (h == "not") {
      if (e.items.size() != 2) throw ParseError(file_, e.pos, "malformed (not ...)");
      (when == When::End ? s.del_end : s.del_start).push_back(atom(e.items[1]));
      return;
    }
    if (h == "increase" || h == "decrease") {
      if (e.items.size() != 3) throw ParseError(file_, e.pos, "malformed " + h);
      if (e.items[2].is_list || !is_number(e.items[2].sym))
        throw UnsupportedFeature(file_, e.items[2].pos,
                                 "non-constant " + h + " amount");
      s.num_eff.push_back({fun_ref(e.items[1]), number(e.items[2]), h == "increase", when});
      return;
    }
    if (h == "assign" || h == "scale-up" || h == "scale-down")
      throw UnsupportedFeature(file_, e.pos, h + " effect");
    (when == When::End ? s.add_end : s.add_start).push_back(atom(e));
  }

  void durative_condition(const SExpr& e, ActionSchema& s) {
    if (!e.is_list) throw ParseError(file_, e.pos, "expected a durative condition");
    if (e.items.empty()) return;
    const std::string& h = e.head();
    if (h == "and") {
      for (size_t i = 1; i < e.items.size(); ++i) durative_condition(e.items[i], s);
      return;
    }
    if (h == "at" && e.items.size() == 3 && !e.items[1].is_list) {
      if (e.items[1].sym == "start") {
        condition(e.items[2], When::Start, s.pre_start, s.num_pre);
        return;
      }
      if (e.items[1].sym == "end") {
        condition(e.items[2], When::End, s.pre_end, s.num_pre);
        return;
      }
    }
    if (h == "over" && e.items.size() == 3 && !e.items[1].is_list &&
        e.items[1].sym == "all") {
      std::vector<NumericCondition> nums;
      condition(e.items[2], When::Overall, s.pre_overall, nums);
      if (!nums.empty())
        throw UnsupportedFeature(file_, e.pos, "over-all numeric condition");
      return;
    }
    throw ParseError(file_, e.pos, "durative conditions need (at start ...), (over all ...) or (at end ...)");
  }

  void durative_effect(const SExpr& e, ActionSchema& s) {
    if (!e.is_list) throw ParseError(file_, e.pos, "expected a durative effect");
    if (e.items.empty()) return;
    const std::string& h = e.head();
    if (h == "and") {
      for (size_t i = 1; i < e.items.size(); ++i) durative_effect(e.items[i], s);
      return;
    }
    if (h == "at" && e.items.size() == 3 && !e.items[1].is_list) {
      if (e.items[1].sym == "start") {
        effect(e.items[2], When::Start, s);
        return;
      }
      if (e.items[1].sym == "end") {
        effect(e.items[2], When::End, s);
        return;
      }
    }
    throw ParseError(file_, e.pos, "durative effects need (at start ...) or (at end ...)");
  }

  void duration(const SExpr& e, ActionSchema& s) {
    if (!e.is_list || e.items.size() != 3 || e.head() != "=" ||
        e.items[1].is_list || e.items[1].sym != "?duration") {
      if (e.is_list && (e.head() == ">=" || e.head() == "<="))
        throw UnsupportedFeature(file_, e.pos, "duration inequality");
      throw ParseError(file_, e.pos, "expected (= ?duration <value>)");
    }
    const SExpr& v = e.items[2];
    if (v.is_list) {
      s.duration_fn = fun_ref(v);
    } else if (is_number(v.sym)) {
      s.duration_const = Rational::parse(v.sym);
    } else {
      throw ParseError(file_, v.pos, "duration must be a constant or a function term");
    }
  }

  ActionSchema action(const SExpr& e, bool durative) {
    ActionSchema s;
    s.durative = durative;
    if (e.items.size() < 2 || e.items[1].is_list)
      throw ParseError(file_, e.pos, "action without a name");
    s.name = e.items[1].sym;
    size_t i = 2;
    bool saw_duration = false;
    while (i < e.items.size()) {
      const std::string& key = sym(e.items[i]);
      if (i + 1 >= e.items.size())
        throw ParseError(file_, e.items[i].pos, "missing value after " + key);
      const SExpr& val = e.items[i + 1];
      if (key == ":parameters") {
        if (!val.is_list) throw ParseError(file_, val.pos, "malformed :parameters");
        s.params = typed_list(val, 0);
      } else if (!durative && key == ":precondition") {
        condition(val, When::Start, s.pre_start, s.num_pre);
      } else if (!durative && key == ":effect") {
        effect(val, When::Start, s);
      } else if (durative && key == ":duration") {
        duration(val, s);
        saw_duration = true;
      } else if (durative && key == ":condition") {
        durative_condition(val, s);
      } else if (durative && key == ":effect") {
        durative_effect(val, s);
      } else {
        throw ParseError(file_, e.items[i].pos, "unknown action section " + key);
      }
      i += 2;
    }
    if (durative && !saw_duration)
      throw ParseError(file_, e.pos, "durative action without :duration");
    return s;
  }

  void init_entry(const SExpr& e, Problem& p) {
    if (!e.is_list || e.items.empty())
      throw ParseError(file_, e.pos, "malformed :init entry");
    const std::string& h = e.head();
    if (h == "=") {
      if (e.items.size() != 3) throw ParseError(file_, e.pos, "malformed numeric init");
      p.init_values.emplace_back(fun_ref(e.items[1]), number(e.items[2]));
      return;
    }
    if (h == "at" && e.items.size() == 3 && !e.items[1].is_list &&
        is_number(e.items[1].sym))
      throw UnsupportedFeature(file_, e.pos, "timed initial literal");
    if (h == "not") throw UnsupportedFeature(file_, e.pos, "negated init literal");
    p.init.push_back(atom(e));
  }

  void goal(const SExpr& e, std::vector<Atom>& out) {
    if (!e.is_list) throw ParseError(file_, e.pos, "expected a goal condition");
    if (e.items.empty()) return;
    const std::string& h = e.head();
    if (h == "and") {
      for (size_t i = 1; i < e.items.size(); ++i) goal(e.items[i], out);
      return;
    }
    reject_adl(e, "goal");
    if (h == "not") throw UnsupportedFeature(file_, e.pos, "negative goal (not)");
    if (h == ">=" || h == "<=" || h == "<" || h == ">")
      throw UnsupportedFeature(file_, e.pos, "numeric goal");
    out.push_back(atom(e));
  }

  void metric(const SExpr& e, Problem& p) {
    if (e.items.size() != 3 || e.items[1].is_list)
      throw ParseError(file_, e.pos, "malformed :metric");
    if (e.items[1].sym != "minimize")
      throw UnsupportedFeature(file_, e.pos, "metric direction " + e.items[1].sym);
    const SExpr& what = e.items[2];
    if (what.is_list && what.items.size() == 1 && !what.items[0].is_list &&
        what.items[0].sym == "total-time") {
      p.metric_total_time = true;
      return;
    }
    throw UnsupportedFeature(file_, what.pos, "metric expression (only (total-time) is accepted)");
  }

  std::string file_;
};

SExpr read_tree(const std::string& text, const std::string& filename) {
  Lexer lex(text, filename);
  Reader reader(lex.run(), filename);
  return reader.read();
}

void print_typed(std::ostringstream& os, const std::vector<TypedName>& list) {
  for (size_t i = 0; i < list.size(); ++i) {
    if (i) os << " ";
    os << list[i].name << " - " << list[i].type;
  }
}

void print_atom(std::ostringstream& os, const Atom& a) {
  os << "(" << a.pred;
  for (auto& arg : a.args) os << " " << arg;
  os << ")";
}

void print_ref(std::ostringstream& os, const FunctionRef& f) {
  os << "(" << f.fn;
  for (auto& arg : f.args) os << " " << arg;
  os << ")";
}

const char* wrap_open(When w) {
  switch (w) {
    case When::Start: return "(at start ";
    case When::Overall: return "(over all ";
    case When::End: return "(at end ";
  }
  return "";
}

void print_action(std::ostringstream& os, const ActionSchema& s) {
  os << "  (" << (s.durative ? ":durative-action " : ":action ") << s.name << "\n";
  os << "   :parameters (";
  print_typed(os, s.params);
  os << ")\n";
  if (s.durative) {
    os << "   :duration (= ?duration ";
    if (s.duration_fn) {
      print_ref(os, *s.duration_fn);
    } else {
      os << s.duration_const.str();
    }
    os << ")\n   :condition (and";
    auto conds = [&](const std::vector<Atom>& atoms, When w) {
      for (auto& a : atoms) {
        os << " " << wrap_open(w);
        print_atom(os, a);
        os << ")";
      }
      for (auto& n : s.num_pre) {
        if (n.when != w) continue;
        os << " " << wrap_open(w) << "(>= ";
        print_ref(os, n.ref);
        os << " " << n.bound.str() << "))";
      }
    };
    conds(s.pre_start, When::Start);
    conds(s.pre_overall, When::Overall);
    conds(s.pre_end, When::End);
    os << ")\n   :effect (and";
    auto effs = [&](When w) {
      const auto& adds = (w == When::End) ? s.add_end : s.add_start;
      const auto& dels = (w == When::End) ? s.del_end : s.del_start;
      for (auto& a : adds) {
        os << " " << wrap_open(w);
        print_atom(os, a);
        os << ")";
      }
      for (auto& a : dels) {
        os << " " << wrap_open(w) << "(not ";
        print_atom(os, a);
        os << "))";
      }
      for (auto& n : s.num_eff) {
        if (n.when != w) continue;
        os << " " << wrap_open(w) << "(" << (n.increase ? "increase " : "decrease ");
        print_ref(os, n.ref);
        os << " " << n.amount.str() << "))";
      }
    };
    effs(When::Start);
    effs(When::End);
    os << "))\n";
  } else {
    os << "   :precondition (and";
    for (auto& a : s.pre_start) {
      os << " ";
      print_atom(os, a);
    }
    for (auto& n : s.num_pre) {
      os << " (>= ";
      print_ref(os, n.ref);
      os << " " << n.bound.str() << ")";
    }
    os << ")\n   :effect (and";
    for (auto& a : s.add_start) {
      os << " ";
      print_atom(os, a);
    }
    for (auto& a : s.del_start) {
      os << " (not ";
      print_atom(os, a);
      os << ")";
    }
    for (auto& n : s.num_eff) {
      os << " (" << (n.increase ? "increase " : "decrease ");
      print_ref(os, n.ref);
      os << " " << n.amount.str() << ")";
    }
    os << "))\n";
  }
}

}  // namespace

Domain parse_domain(const std::string& text, const std::string& filename) {
  ModelBuilder b(filename);
  return b.domain(read_tree(text, filename));
}

Problem parse_problem(const std::string& text, const std::string& filename) {
  ModelBuilder b(filename);
  return b.problem(read_tree(text, filename));
}

std::string print_domain(const Domain& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  if (!d.requirements.empty()) {
    os << " (:requirements";
    for (auto& r : d.requirements) os << " " << r;
    os << ")\n";
  }
  if (!d.types.empty()) {
    os << " (:types ";
    print_typed(os, d.types);
    os << ")\n";
  }
  if (!d.constants.empty()) {
    os << " (:constants ";
    print_typed(os, d.constants);
    os << ")\n";
  }
  if (!d.predicates.empty()) {
    os << " (:predicates";
    for (auto& p : d.predicates) {
      os << " (" << p.name;
      if (!p.params.empty()) {
        os << " ";
        print_typed(os, p.params);
      }
      os << ")";
    }
    os << ")\n";
  }
  if (!d.functions.empty()) {
    os << " (:functions";
    for (auto& f : d.functions) {
      os << " (" << f.name;
      if (!f.params.empty()) {
        os << " ";
        print_typed(os, f.params);
      }
      os << ")";
    }
    os << ")\n";
  }
  for (auto& a : d.actions) print_action(os, a);
  os << ")\n";
  return os.str();
}

std::string print_problem(const Problem& p) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n (:domain " << p.domain_name << ")\n";
  if (!p.objects.empty()) {
    os << " (:objects ";
    print_typed(os, p.objects);
    os << ")\n";
  }
  os << " (:init";
  for (auto& a : p.init) {
    os << " ";
    print_atom(os, a);
  }
  for (auto& [ref, value] : p.init_values) {
    os << " (= ";
    print_ref(os, ref);
    os << " " << value.str() << ")";
  }
  os << ")\n (:goal (and";
  for (auto& g : p.goals) {
    os << " ";
    print_atom(os, g);
  }
  os << "))\n";
  if (p.metric_total_time) os << " (:metric minimize (total-time))\n";
  os << ")\n";
  return os.str();
}

}  // namespace subplan::pddl
