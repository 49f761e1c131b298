#pragma once

// The acceptance suite, shared by the test binary and `selftest`.

#include <cstdint>
#include <string>
#include <vector>

namespace sublin::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  std::uint64_t digest = 0;  ///< hash of the aggregates a stochastic criterion produced; 0 otherwise
};

struct SuiteOptions {
  std::vector<int> criteria;  ///< empty: 1 to 10
  bool quick = false;         ///< axioms, G-normal oracles and a reduced Kolmogorov run
  unsigned workers = 1;
};

CriterionResult run_criterion(int id, const SuiteOptions& options);
std::vector<CriterionResult> run_suite(const SuiteOptions& options);

}  // namespace sublin::acceptance
