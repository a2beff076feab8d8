// Repositioning cost as a minimum-cost network flow, and Euclidean
// projection onto the scaled simplex.
#pragma once

#include "soar/lp.hpp"
#include "soar/types.hpp"

namespace soar {

struct FlowResult {
  double value = 0.0;
  Mat flows;  // flows(i,j) = units moved i -> j
};

// Cheapest flow realizing the net change `delta` (must sum to zero):
// min sum c_ij f_ij  s.t.  sum_i f_ij - sum_k f_jk = delta_j for all j.
FlowResult min_cost_flow(const Vec& delta, const NetworkConfig& cfg);

// Convenience wrapper returning just the optimal cost M(delta).
double repositioning_cost(const Vec& delta, const NetworkConfig& cfg);

// argmin_{w in simplex(K)} ||w - v||_2 via sort-and-threshold.
InventoryVector project_simplex(const Vec& v, double K = 1.0);

}  // namespace soar
