#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace stripkde {

struct CheckResult
{
  std::string name;
  double value;
  double expected;
  double tolerance; //!< allowed |value - expected| (or bound, see detail)
  bool pass;
  std::string detail;
};

//! Names of the deterministic checks, in execution order.
std::vector<std::string> selfcheck_names();

//! Runs every check. `inject_fault` names a check whose reference constant
//! is perturbed by 1% (test hook); unknown names throw std::invalid_argument.
std::vector<CheckResult> run_selfcheck_suite(std::string_view inject_fault = {});

//! Prints a pass/fail table; returns 0 when all pass, 1 otherwise.
int run_selfcheck(std::ostream& os, std::string_view inject_fault = {});

} // namespace stripkde
