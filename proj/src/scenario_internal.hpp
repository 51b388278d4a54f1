#pragma once

#include <vector>

#include "tvcap/scenario.hpp"

namespace tvcap::cli::detail {

// checks merged onto their defaults, names filled in
std::vector<Json> parsed_checks(const Scenario& s);
Scenario sweep_base(const Scenario& s);
// one scenario per sweep value, parameter overridden
std::vector<Scenario> sweep_members(const Scenario& s);

}  // namespace tvcap::cli::detail
