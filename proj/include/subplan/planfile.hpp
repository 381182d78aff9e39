#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "subplan/mutex.hpp"
#include "subplan/rational.hpp"
#include "subplan/task.hpp"

namespace subplan {

class PlanParseError : public std::runtime_error {
public:
  explicit PlanParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Emission order of a schedule's steps: ascending (start time, action id).
std::vector<int> plan_order(const std::vector<ScheduledAction>& actions);

// IPC plan text: one `<start>: (<name> <args>) [<duration>]` line per step in
// plan_order, LF endings, exact rational literals. Empty schedule -> "".
std::string write_plan(const GroundTask& task, const std::vector<ScheduledAction>& actions);

// Inverse of write_plan. Blank lines and `;` comments are skipped; anything
// else must parse exactly, name a known ground action, and repeat its
// duration. Sources are not part of the format and come back 0.
std::vector<ScheduledAction> parse_plan(const GroundTask& task, const std::string& text);

// Attribution text: `<plan line index>: <subproblem index>` per line, aligned
// with the plan file's line order.
std::string write_attribution(const std::vector<int>& sources);
std::vector<int> parse_attribution(const std::string& text);

// Structured report: `key: value` lines, lists as `key[i]: value`, emitted in
// insertion order.
class Report {
public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, int64_t value);
  void add(const std::string& key, const Rational& value);
  void add_item(const std::string& key, int index, const std::string& value);
  std::string str() const;

private:
  std::vector<std::string> lines_;
};

}  // namespace subplan
