#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ahres/config.hpp"

namespace ahres {

// Names accepted by run_checks, in report order.
const std::vector<std::string>& check_suite_names();

// Runs the named invariant suites on the configured model and returns
// {"suites": {name: {"pass": bool, "checks": [...]}}, "pass": bool}.
nlohmann::json run_checks(const std::vector<std::string>& suites, const RunConfig& cfg, int threads);

}  // namespace ahres
