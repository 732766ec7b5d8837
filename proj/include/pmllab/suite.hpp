#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pmllab/verify.hpp"

namespace pmllab {

/// One acceptance criterion: a check run at its standard parameters.
struct SuiteEntry {
  int number;
  std::string name;
  std::string summary;
  double budget_seconds;
  std::function<CheckReport(const DeskSetup&, const CheckOptions&)> run;
};

/// The twelve standard checks in criterion order.
const std::vector<SuiteEntry>& standard_checks();

/// "identities" (1-6), "solvers" (7-12) or "all". Throws ValidationError.
std::vector<const SuiteEntry*> suite(const std::string& name);

/// Entry by check name. Throws ValidationError.
const SuiteEntry& find_check(const std::string& name);

}  // namespace pmllab
