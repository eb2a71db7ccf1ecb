#pragma once

// Acceptance suite: eleven end-to-end checks with pinned settings and
// tolerances. Shared by `heatvar selftest` and the acceptance test binary.

#include <string>
#include <vector>

namespace heatvar {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string details;
};

inline constexpr int kCriterionCount = 11;

/// Runs one criterion (1..kCriterionCount). Exceptions are reported as failures.
CriterionResult run_criterion(int id);

/// "PASS <id> <name>: <details>" or "FAIL ...".
std::string format_result(const CriterionResult& r);

}  // namespace heatvar
