#pragma once

// Small hand-rolled generators for the property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sublin/scenario.hpp"

namespace gen {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  /// Values on a quarter lattice so that members share support points.
  double lattice(double lo, double hi) { return std::round(uniform(lo, hi) * 4.0) / 4.0; }

  sublin::scenario::DiscreteDistribution distribution(int max_atoms, double lo, double hi) {
    const int k = integer(1, max_atoms);
    std::vector<double> xs;
    std::vector<double> ws;
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      xs.push_back(lattice(lo, hi));
      ws.push_back(uniform(0.05, 1.0));
      total += ws.back();
    }
    double rest = 1.0;
    for (int j = 0; j + 1 < k; ++j) {
      ws[j] /= total;
      rest -= ws[j];
    }
    ws[k - 1] = rest;
    return sublin::scenario::DiscreteDistribution(1, xs, ws);
  }

  sublin::scenario::ScenarioSet set(int max_members = 5, int max_atoms = 6, double lo = -3.0, double hi = 3.0) {
    std::vector<sublin::scenario::DiscreteDistribution> ms;
    const int m = integer(1, max_members);
    for (int i = 0; i < m; ++i) ms.push_back(distribution(max_atoms, lo, hi));
    return sublin::scenario::ScenarioSet(std::move(ms));
  }
};

}  // namespace gen
