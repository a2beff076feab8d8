// Best base-stock computation from historical data: exact MILP, the LP
// reformulation under the cost condition, the SAA clairvoyant benchmark, and
// fixed-policy evaluation.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "soar/dynamics.hpp"
#include "soar/lp.hpp"
#include "soar/types.hpp"

namespace soar {

struct History {
  std::vector<DemandSample> samples;
  std::vector<std::vector<SubperiodSample>> extended_samples;
  InventoryVector initial_state;

  bool is_extended() const { return !extended_samples.empty(); }
  int size() const {
    return is_extended() ? static_cast<int>(extended_samples.size())
                         : static_cast<int>(samples.size());
  }
  int n() const { return initial_state.n(); }
  void validate() const;
};

enum class OfflineSolverKind { Milp, Lp, SaaGrid };

struct OfflineSolution {
  InventoryVector base_stock;
  double objective = 0.0;
  OfflineSolverKind solver_kind = OfflineSolverKind::Lp;
  double optimality_gap = 0.0;
};

// Row-wise dominance of expected lost-sales cost over repositioning cost:
// sum_i l_ji P_ji >= sum_i P_ji c_ij for every row j of every matrix.
bool check_cost_condition(const NetworkConfig& cfg, const std::vector<Mat>& od_matrices);
bool check_cost_condition(const NetworkConfig& cfg, const History& h);

// LP reformulation (valid under the cost condition). Large sample counts are
// solved by cutting planes on the equivalent convex objective; small ones
// directly as one LP. Warns to stderr if the cost condition fails.
OfflineSolution solve_offline_lp(const History& h, const NetworkConfig& cfg);

struct MilpOptions {
  long node_limit = 1000000;
  double gap_tol = 1e-6;
};

struct MilpNodeLimitError : std::runtime_error {
  OfflineSolution incumbent;
  double gap;
  MilpNodeLimitError(OfflineSolution inc, double g)
      : std::runtime_error("solve_offline_milp: node limit exceeded"), incumbent(std::move(inc)), gap(g) {}
};

// Exact optimum under any cost structure via branch and bound over the
// per-location demand segments (the z binaries of the encoding).
OfflineSolution solve_offline_milp(const History& h, const NetworkConfig& cfg,
                                   const MilpOptions& opts = {});

// The literal mixed-integer encoding with z relaxed into [0,1]: per-location
// sorting permutations, segment rows, and the big-M linking rows. Exposed so
// the encoding semantics can be exercised directly (fix z values by adding
// equality rows and solve).
struct MilpEncoding {
  LpProblem lp;
  int t = 0;
  int n = 0;
  // per location, sample indices ordered by nondecreasing demand (stable)
  std::vector<std::vector<int>> sort_order;

  int s_var(int i) const { return i; }
  int m_var(int s, int i) const { return n + s * n + i; }
  int xi_var(int s, int i, int j) const { return n + t * n + s * n * n + i * n + j; }
  // k ranges over 0..t inclusive (the t+1 segment indicators)
  int z_var(int k, int i) const { return n + t * n + t * n * n + k * n + i; }
};

MilpEncoding build_offline_milp_encoding(const History& h, const NetworkConfig& cfg);

using DemandSampler = std::function<DemandSample()>;
using ExtendedSampler = std::function<std::vector<SubperiodSample>()>;

struct SaaOptions {
  // MILP fallback instances are capped to stay desk-scale.
  int milp_sample_cap = 24;
};

// Clairvoyant benchmark: draw m fresh samples and solve the offline problem
// (LP when the cost condition holds on the draws, MILP otherwise).
OfflineSolution best_base_stock_saa(const DemandSampler& sampler, int m, const NetworkConfig& cfg,
                                    const SaaOptions& opts = {});
OfflineSolution best_base_stock_saa_extended(const ExtendedSampler& sampler, int m,
                                             const NetworkConfig& cfg);

// Cumulative modified cost of repositioning to S every period along a trace.
double evaluate_policy(const InventoryVector& S, const std::vector<DemandSample>& trace,
                       const InventoryVector& x1, const NetworkConfig& cfg);
double evaluate_policy_extended(const InventoryVector& S,
                                const std::vector<std::vector<SubperiodSample>>& trace,
                                const InventoryVector& x1, const NetworkConfig& cfg);

// Objective value of the offline problem at a fixed S (per-sample surrogate
// costs with fulfillment forced to min(S, d)).
double offline_objective_at(const InventoryVector& S, const History& h, const NetworkConfig& cfg);

// Per-sample surrogate LP with separate caps w <= d and w <= y; duals of the
// w <= y rows form a subgradient of the optimal value in y. Shared by the
// cutting-plane solver and the subgradient tests.
struct SurrogateValue {
  double value = 0.0;
  Vec subgradient;  // with respect to y
  Vec w;            // optimal fulfillment
};
SurrogateValue surrogate_value_two_caps(const Vec& y, const DemandSample& d, const NetworkConfig& cfg);
SurrogateValue surrogate_value_two_caps_extended(const Vec& y, const std::vector<SubperiodSample>& subs,
                                                 const NetworkConfig& cfg);

}  // namespace soar
