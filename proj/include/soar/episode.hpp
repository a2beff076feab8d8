// Result of one simulated run of an online algorithm.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soar/types.hpp"

namespace soar {

struct EpisodeResult {
  std::string algorithm;
  uint64_t seed = 0;
  std::vector<double> period_costs;       // realized modified cost per period
  std::vector<InventoryVector> policies;  // y_t actually played
  std::vector<double> surrogate_costs;    // per-period surrogate LP value (NaN when not applicable)
  double cumulative_cost = 0.0;

  int horizon() const { return static_cast<int>(period_costs.size()); }
};

}  // namespace soar
