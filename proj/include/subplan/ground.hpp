#pragma once

#include "subplan/pddl.hpp"
#include "subplan/task.hpp"

namespace subplan {

// Instantiates the lifted model over the declared objects, prunes actions
// whose preconditions can never hold (not initially true and added by no
// action), and assigns lexicographic fact/action indices.
GroundTask ground(const pddl::Domain& domain, const pddl::Problem& problem,
                  const std::string& domain_file, const std::string& problem_file);

}  // namespace subplan
