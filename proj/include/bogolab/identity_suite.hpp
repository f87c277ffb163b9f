#pragma once

// Exact operator-identity suite: sector-projector calculus, pull-through
// formula, weight algebra, mean-field cancellations, the H - H~ difference
// identity, decomposition round trips, and the trace-norm sandwich.  Checks
// run the production occupation-basis code against independent dense
// first-quantized assemblies on small systems.

#include <cstdint>
#include <string>
#include <vector>

namespace bogolab {

struct IdentityCheck {
  std::string name;
  double defect = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct IdentitySuiteOptions {
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  // pairs (N, M)
  std::vector<std::pair<int, int>> sizes = {{2, 3}, {3, 3}, {4, 3}, {3, 4}};
};

std::vector<IdentityCheck> run_identity_suite(const IdentitySuiteOptions& opts = {});

}  // namespace bogolab
