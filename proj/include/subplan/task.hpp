#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "subplan/rational.hpp"

namespace subplan {

using FactId = int32_t;
using ActionId = int32_t;
using ResourceId = int32_t;

enum class When : uint8_t { Start = 0, Overall = 1, End = 2 };

// Fixed-width bit set over the grounded fact universe.
class FactSet {
public:
  FactSet() = default;
  explicit FactSet(int nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  int size() const { return nbits_; }

  void set(FactId f) { words_[f >> 6] |= (uint64_t{1} << (f & 63)); }
  void clear(FactId f) { words_[f >> 6] &= ~(uint64_t{1} << (f & 63)); }
  bool test(FactId f) const { return (words_[f >> 6] >> (f & 63)) & 1; }

  bool intersects(const FactSet& o) const {
    for (size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }

  // Lowest-index common fact, -1 if disjoint. Used for deterministic witnesses.
  FactId first_common(const FactSet& o) const {
    for (size_t i = 0; i < words_.size(); ++i) {
      uint64_t w = words_[i] & o.words_[i];
      if (w) return static_cast<FactId>(i * 64 + __builtin_ctzll(w));
    }
    return -1;
  }

  bool subset_of(const FactSet& o) const {
    for (size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  void unite(const FactSet& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  }
  void subtract(const FactSet& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  }

  int count() const {
    int n = 0;
    for (uint64_t w : words_) n += __builtin_popcountll(w);
    return n;
  }
  bool empty() const {
    for (uint64_t w : words_)
      if (w) return false;
    return true;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (size_t i = 0; i < words_.size(); ++i) {
      uint64_t w = words_[i];
      while (w) {
        fn(static_cast<FactId>(i * 64 + __builtin_ctzll(w)));
        w &= w - 1;
      }
    }
  }

  std::vector<FactId> to_vector() const {
    std::vector<FactId> out;
    for_each([&](FactId f) { out.push_back(f); });
    return out;
  }

  bool operator==(const FactSet&) const = default;

  size_t hash() const {
    size_t h = 0xcbf29ce484222325ULL;
    for (uint64_t w : words_) {
      h ^= w;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

private:
  int nbits_ = 0;
  std::vector<uint64_t> words_;
};

struct NumericPre {
  ResourceId res;
  Rational bound;  // require amount >= bound
  When when = When::Start;
  bool operator==(const NumericPre&) const = default;
};

struct NumericEffect {
  ResourceId res;
  Rational delta;  // increase > 0, decrease < 0
  When when = When::Start;
  bool operator==(const NumericEffect&) const = default;
};

struct GroundAction {
  ActionId id = -1;
  std::string schema;
  std::vector<std::string> args;
  Rational duration;  // 0 for a non-temporal action
  FactSet pre_start, pre_overall, pre_end;
  FactSet add_start, add_end, del_start, del_end;
  std::vector<NumericPre> num_pre;
  std::vector<NumericEffect> num_eff;
  // Collapsed views used by the sequential semantics and the mutex tests.
  FactSet pre_all, add_all, del_all;

  std::string name() const {
    std::string s = "(" + schema;
    for (auto& a : args) s += " " + a;
    return s + ")";
  }
};

struct GroundTask {
  std::vector<std::string> fact_names;      // index = FactId, sorted
  std::vector<std::string> resource_names;  // index = ResourceId, sorted
  std::vector<GroundAction> actions;        // index = ActionId, sorted
  FactSet init;
  std::vector<Rational> init_amounts;
  std::vector<FactId> goals;  // conjunct order as written
  bool temporal = false;
  bool metric_total_time = false;
  std::unordered_map<std::string, FactId> fact_ids;
  std::unordered_map<std::string, ActionId> action_ids;

  int fact_count() const { return static_cast<int>(fact_names.size()); }
  int resource_count() const { return static_cast<int>(resource_names.size()); }
  int action_count() const { return static_cast<int>(actions.size()); }

  FactSet goal_set() const {
    FactSet g(fact_count());
    for (FactId f : goals) g.set(f);
    return g;
  }
};

struct State {
  FactSet facts;
  std::vector<Rational> amounts;
  bool operator==(const State&) const = default;

  size_t hash() const {
    size_t h = facts.hash();
    for (auto& a : amounts)
      h ^= a.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// Applying a decrease that would push a resource below zero signals an
// invalid plan; this is distinct from the inapplicable no-op branch.
class NumericUnderflow : public std::runtime_error {
public:
  NumericUnderflow(const std::string& action, const std::string& resource)
      : std::runtime_error("numeric underflow on " + resource + " applying " + action) {}
};

State initial_state(const GroundTask& task);

// Collapsed (sequential) applicability: every precondition bucket and every
// numeric bound must hold.
bool applicable(const State& s, const GroundAction& a);

// Would the collapsed numeric effects push some resource below zero?
bool would_underflow(const State& s, const GroundAction& a);

// Result semantics: inapplicable actions leave the state unchanged.
State apply(const State& s, const GroundAction& a);

State apply_sequence(const GroundTask& task, State s, std::span<const ActionId> plan);

bool goal_satisfied(const GroundTask& task, const State& s);

}  // namespace subplan
