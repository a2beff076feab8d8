// Domain types for the closed-network repositioning model.
#pragma once

#include <cstdint>
#include <vector>

#include "soar/linalg.hpp"

namespace soar {

// Tolerance for the binding indicator in censored observations. Exact
// floating-point equality between fulfilled demand and available stock is
// unreliable, so a coordinate counts as binding within this slack.
constexpr double kBindingTol = 1e-9;

// Tolerance on conservation-type identities (mass balance, simplex totals).
constexpr double kMassTol = 1e-9;

// Locations plus per-unit cost matrices. lost_sales(i,j) is charged per unit
// of unmet demand departing i destined for j; repo_cost(i,j) per unit moved
// from i to j, with zero diagonal.
struct NetworkConfig {
  int n = 0;
  Mat lost_sales;
  Mat repo_cost;

  double max_repo_cost() const;
  double max_lost_sales() const;
  void validate() const;
};

NetworkConfig make_network_config(int n, Mat lost_sales, Mat repo_cost);

// Point of the scaled simplex: nonnegative allocation summing to `total`.
struct InventoryVector {
  Vec values;
  double total = 1.0;

  int n() const { return static_cast<int>(values.size()); }
  void validate() const;
};

InventoryVector make_inventory(Vec values, double total = 1.0);

// One period of the base model: demand vector plus a row-stochastic
// origin-destination matrix.
struct DemandSample {
  Vec demand;
  Mat od_matrix;

  int n() const { return static_cast<int>(demand.size()); }
  void validate() const;
};

// One subperiod of the extended model; row sums of the OD matrix may fall
// short of 1, the shortfall staying outstanding at the origin.
struct SubperiodSample {
  Vec demand;
  Mat od_matrix;

  int n() const { return static_cast<int>(demand.size()); }
  void validate() const;
};

// Extended-model state: on-hand stock per location plus outstanding rentals
// indexed by origin location.
struct ExtendedState {
  Vec on_hand;
  Vec outstanding;

  int n() const { return static_cast<int>(on_hand.size()); }
  void validate(double total) const;
};

// What the operator actually sees after a period: fulfilled = min(y, d),
// the realized OD matrix, and which coordinates were stock-bound.
struct CensoredObservation {
  Vec fulfilled;
  Mat od_matrix;
  std::vector<char> binding;  // char to avoid vector<bool> proxies

  int n() const { return static_cast<int>(fulfilled.size()); }
};

}  // namespace soar
