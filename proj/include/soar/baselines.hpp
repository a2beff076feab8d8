// Reference policies: no-repositioning, one-time learning with a round-robin
// exploration phase, and dynamic learning on uncensored data with doubling
// epochs.
#pragma once

#include <vector>

#include "soar/episode.hpp"
#include "soar/offline.hpp"
#include "soar/types.hpp"

namespace soar {

struct OtlConfig {
  int exploration_samples = 20;  // T0, per-location sample count
  double eta = 1.0;              // hyperparameter for the T0 = eta T^{2/3} schedule
};

enum class OfflineMode { Auto, ForceLp, ForceMilp };

// Capability handle granting read access to true demand realizations.
// Algorithms that must work from censored data alone never receive one.
class UncensoredOracle {
 public:
  explicit UncensoredOracle(const std::vector<DemandSample>& trace) : trace_(&trace) {}
  const DemandSample& sample(int t) const { return (*trace_)[t]; }  // 0-based period
  int horizon() const { return static_cast<int>(trace_->size()); }

 private:
  const std::vector<DemandSample>* trace_;
};

// y_t = x_t every period; the dynamics evolve freely with zero
// repositioning cost.
EpisodeResult run_nr(const std::vector<DemandSample>& trace, const InventoryVector& x1,
                     const NetworkConfig& cfg);
EpisodeResult run_nr_extended(const std::vector<std::vector<SubperiodSample>>& trace,
                              const InventoryVector& x1, const NetworkConfig& cfg);

// Base-stock policy pinned to S for the whole trace (the benchmark player).
EpisodeResult run_fixed_policy(const InventoryVector& S, const std::vector<DemandSample>& trace,
                               const InventoryVector& x1, const NetworkConfig& cfg);
EpisodeResult run_fixed_policy_extended(const InventoryVector& S,
                                        const std::vector<std::vector<SubperiodSample>>& trace,
                                        const InventoryVector& x1, const NetworkConfig& cfg);

// One-time learning: n*T0 exploration periods visiting locations round-robin
// (all stock parked at one location, true demand recorded via the oracle),
// then a single offline solve and a fixed base-stock phase. Exploration
// costs are charged.
EpisodeResult run_otl(const std::vector<DemandSample>& trace, const InventoryVector& x1,
                      const NetworkConfig& cfg, const OtlConfig& otl, const UncensoredOracle& oracle,
                      OfflineMode mode = OfflineMode::Auto);

// Dynamic learning with uncensored data: doubling epochs, re-solving the
// offline problem on all data collected so far at every epoch boundary.
EpisodeResult run_dl_uncensored(const std::vector<DemandSample>& trace, const InventoryVector& x1,
                                const NetworkConfig& cfg, const UncensoredOracle& oracle,
                                OfflineMode mode = OfflineMode::Auto);

}  // namespace soar
