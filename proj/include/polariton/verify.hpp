#pragma once

#include <string>
#include <vector>

#include "polariton/config.hpp"

namespace polariton {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Solver and theory self-checks on the grid and physics of `config`:
/// transform roundtrip, Parseval, propagator isometry and unitarity, the
/// matrix-exponential oracle, mass conservation, time reversal, root residuals.
std::vector<CheckResult> run_verification(const RunConfig& config);

}  // namespace polariton
