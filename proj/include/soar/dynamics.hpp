// Exact inventory and cost dynamics of the base and extended models.
#pragma once

#include <vector>

#include "soar/flow.hpp"
#include "soar/types.hpp"

namespace soar {

// Observable outcome of facing demand d with stock y: fulfilled = min(y, d)
// elementwise, with per-coordinate stock-binding flags.
CensoredObservation censor(const InventoryVector& y, const DemandSample& d);

// x' = (y - d)^+ + P^T min(y, d). Total inventory is conserved.
InventoryVector state_update(const InventoryVector& y, const DemandSample& d);

// sum_ij l_ij P_ij (d_i - y_i)^+
double lost_sales_cost(const InventoryVector& y, const DemandSample& d, const NetworkConfig& cfg);

// M(y - x) - sum_ij l_ij P_ij min(d_i, y_i); can be negative.
double modified_cost(const InventoryVector& x, const InventoryVector& y, const DemandSample& d,
                     const NetworkConfig& cfg);

// M(y - x) + lost_sales_cost.
double total_cost(const InventoryVector& x, const InventoryVector& y, const DemandSample& d,
                  const NetworkConfig& cfg);

// One subperiod of the extended model:
//   on_hand'     = (x - d)^+ + P^T [min(x, d) + gamma]
//   outstanding' = [min(x, d) + gamma] o [(I - P) 1]
ExtendedState state_update_extended(const ExtendedState& s, const SubperiodSample& sub);

struct ExtendedPeriodOutcome {
  double cost = 0.0;                 // M(y - x_prev) minus fulfilled lost-sales value
  InventoryVector end_inventory;     // post-period stock, residual outstanding returned to origin
  std::vector<CensoredObservation> observations;  // per-subperiod censored data
};

// Plays one review period of the extended model: repositions from x_prev to
// y, runs the H subperiods from (y, gamma = 0), and returns any outstanding
// units left at the end of the period to their origin locations.
ExtendedPeriodOutcome extended_modified_cost(const InventoryVector& x_prev, const InventoryVector& y,
                                             const std::vector<SubperiodSample>& subs,
                                             const NetworkConfig& cfg);

}  // namespace soar
