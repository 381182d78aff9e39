#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "subplan/rational.hpp"

namespace subplan::pddl {

struct SourcePos {
  int line = 0;
  int col = 0;
  bool operator==(const SourcePos&) const = default;
};

// All frontend failures carry file:line:col so the CLI can print
// "ERROR file:line:col message" diagnostics.
class FrontendError : public std::runtime_error {
public:
  FrontendError(std::string file, SourcePos pos, const std::string& message)
      : std::runtime_error(message), file_(std::move(file)), pos_(pos) {}
  const std::string& file() const { return file_; }
  SourcePos pos() const { return pos_; }
  std::string diagnostic() const {
    return "ERROR " + file_ + ":" + std::to_string(pos_.line) + ":" +
           std::to_string(pos_.col) + " " + what();
  }

private:
  std::string file_;
  SourcePos pos_;
};

class ParseError : public FrontendError {
  using FrontendError::FrontendError;
};

// Constructs outside the accepted fragment (quantifiers, disjunction,
// negative preconditions, conditional effects, ...). Message names the construct.
class UnsupportedFeature : public FrontendError {
  using FrontendError::FrontendError;
};

// Unknown types/predicates/functions, arity or type mismatches.
class TypeError : public FrontendError {
  using FrontendError::FrontendError;
};

struct TypedName {
  std::string name;
  std::string type = "object";
  bool operator==(const TypedName&) const = default;
};

struct Atom {
  std::string pred;
  std::vector<std::string> args;
  bool operator==(const Atom&) const = default;
};

struct FunctionRef {
  std::string fn;
  std::vector<std::string> args;
  bool operator==(const FunctionRef&) const = default;
};

enum class When : uint8_t { Start = 0, Overall = 1, End = 2 };

struct NumericCondition {  // (>= ref bound), at `when`
  FunctionRef ref;
  Rational bound;
  When when = When::Start;
  bool operator==(const NumericCondition&) const = default;
};

struct NumericEffect {  // increase/decrease ref by a constant, at `when`
  FunctionRef ref;
  Rational amount;
  bool increase = true;
  When when = When::Start;
  bool operator==(const NumericEffect&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  bool durative = false;
  Rational duration_const = Rational(0);
  std::optional<FunctionRef> duration_fn;  // static function of the parameters
  std::vector<Atom> pre_start, pre_overall, pre_end;
  std::vector<NumericCondition> num_pre;
  std::vector<Atom> add_start, add_end, del_start, del_end;
  std::vector<NumericEffect> num_eff;
  bool operator==(const ActionSchema&) const = default;
};

struct PredicateDef {
  std::string name;
  std::vector<TypedName> params;
  bool operator==(const PredicateDef&) const = default;
};

struct FunctionDef {
  std::string name;
  std::vector<TypedName> params;
  bool operator==(const FunctionDef&) const = default;
};

struct Domain {
  std::string name;
  std::vector<std::string> requirements;
  std::vector<TypedName> types;  // name + parent type
  std::vector<TypedName> constants;
  std::vector<PredicateDef> predicates;
  std::vector<FunctionDef> functions;
  std::vector<ActionSchema> actions;
  bool operator==(const Domain&) const = default;
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<Atom> init;
  std::vector<std::pair<FunctionRef, Rational>> init_values;
  std::vector<Atom> goals;  // conjunct order as written
  bool metric_total_time = false;
  bool operator==(const Problem&) const = default;
};

Domain parse_domain(const std::string& text, const std::string& filename);
Problem parse_problem(const std::string& text, const std::string& filename);

// print_* |> parse_* is the identity on the model.
std::string print_domain(const Domain& d);
std::string print_problem(const Problem& p);

}  // namespace subplan::pddl
