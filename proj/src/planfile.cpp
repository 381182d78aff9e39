#include "subplan/planfile.hpp"

#include <algorithm>
#include <sstream>

namespace subplan {

namespace {

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Rational parse_rational(const std::string& text, const std::string& line) {
  try {
    return Rational::parse(strip(text));
  } catch (const std::domain_error& e) {
    throw PlanParseError(std::string(e.what()) + " in line: " + line);
  }
}

}  // namespace

std::vector<int> plan_order(const std::vector<ScheduledAction>& actions) {
  std::vector<int> order(actions.size());
  for (size_t i = 0; i < actions.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (actions[i].start != actions[j].start) return actions[i].start < actions[j].start;
    return actions[i].action < actions[j].action;
  });
  return order;
}

std::string write_plan(const GroundTask& task, const std::vector<ScheduledAction>& actions) {
  std::string out;
  for (int i : plan_order(actions)) {
    const ScheduledAction& s = actions[i];
    const GroundAction& ga = task.actions[s.action];
    out += s.start.str() + ": " + ga.name() + " [" + ga.duration.str() + "]\n";
  }
  return out;
}

std::vector<ScheduledAction> parse_plan(const GroundTask& task, const std::string& text) {
  std::vector<ScheduledAction> out;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = strip(raw);
    if (line.empty() || line[0] == ';') continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw PlanParseError("missing ':' in line: " + line);
    size_t open = line.find('(', colon);
    size_t close = line.find(')', open == std::string::npos ? colon : open);
    if (open == std::string::npos || close == std::string::npos)
      throw PlanParseError("missing action name in line: " + line);
    size_t bra = line.find('[', close);
    size_t ket = line.find(']', bra == std::string::npos ? close : bra);
    if (bra == std::string::npos || ket == std::string::npos)
      throw PlanParseError("missing [duration] in line: " + line);

    Rational start = parse_rational(line.substr(0, colon), line);
    if (start < Rational(0)) throw PlanParseError("negative start in line: " + line);
    std::string name = line.substr(open, close - open + 1);
    auto it = task.action_ids.find(name);
    if (it == task.action_ids.end())
      throw PlanParseError("unknown action " + name);
    Rational dur = parse_rational(line.substr(bra + 1, ket - bra - 1), line);
    const GroundAction& ga = task.actions[it->second];
    if (dur != ga.duration)
      throw PlanParseError("duration " + dur.str() + " does not match " +
                           ga.duration.str() + " for " + name);
    out.push_back({it->second, start, start + dur, 0});
  }
  return out;
}

std::string write_attribution(const std::vector<int>& sources) {
  std::string out;
  for (size_t i = 0; i < sources.size(); ++i)
    out += std::to_string(i) + ": " + std::to_string(sources[i]) + "\n";
  return out;
}

std::vector<int> parse_attribution(const std::string& text) {
  std::vector<std::pair<int, int>> entries;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = strip(raw);
    if (line.empty() || line[0] == ';') continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw PlanParseError("missing ':' in attribution line: " + line);
    try {
      entries.emplace_back(std::stoi(line.substr(0, colon)),
                           std::stoi(line.substr(colon + 1)));
    } catch (const std::exception&) {
      throw PlanParseError("bad attribution line: " + line);
    }
  }
  std::vector<int> out(entries.size(), -1);
  for (auto [idx, src] : entries) {
    if (idx < 0 || idx >= static_cast<int>(out.size()) || out[idx] != -1)
      throw PlanParseError("attribution indices must cover 0.." +
                           std::to_string(out.size() - 1) + " exactly once");
    if (src < 0) throw PlanParseError("negative subproblem index in attribution");
    out[idx] = src;
  }
  return out;
}

void Report::add(const std::string& key, const std::string& value) {
  lines_.push_back(key + ": " + value);
}

void Report::add(const std::string& key, int64_t value) {
  add(key, std::to_string(value));
}

void Report::add(const std::string& key, const Rational& value) { add(key, value.str()); }

void Report::add_item(const std::string& key, int index, const std::string& value) {
  lines_.push_back(key + "[" + std::to_string(index) + "]: " + value);
}

std::string Report::str() const {
  std::string out;
  for (const std::string& l : lines_) out += l + "\n";
  return out;
}

}  // namespace subplan
