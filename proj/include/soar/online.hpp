// SOAR online repositioning: per-period surrogate-cost LPs, dual-based
// subgradients from censored data, and projected subgradient updates; plus
// the multi-subperiod extension.
#pragma once

#include <utility>
#include <vector>

#include "soar/episode.hpp"
#include "soar/types.hpp"

namespace soar {

struct SoarState {
  int period = 1;  // t >= 1; the step size at period t is step_scale / sqrt(t)
  InventoryVector policy;
  double step_scale = 1.0;
};

struct SubgradientReport {
  Vec gradient;          // g_i = lambda_i when binding, else 0; entries <= 0
  Vec duals;             // lambda, duals of the w <= censored-demand rows
  double surrogate_cost = 0.0;
};

// One SOAR iteration: solve the censored surrogate LP, mask duals by the
// binding indicators, take a projected subgradient step. The policy is left
// unchanged if the LP solve fails.
std::pair<SoarState, SubgradientReport> soar_step(const SoarState& state,
                                                  const CensoredObservation& obs,
                                                  const NetworkConfig& cfg);

// Full episode on a demand trace: censor, step, advance the true dynamics.
// Costs recorded are realized modified costs, not the surrogate.
EpisodeResult run_soar(const std::vector<DemandSample>& trace, const InventoryVector& y1,
                       const NetworkConfig& cfg, double step_scale = 1.0);

// Solves the triangular dual recursion backward, recovering the subgradient
// components mu_k from the masked duals g_k of the extended surrogate LP.
std::vector<Vec> recover_subgradients(const std::vector<Vec>& g, const std::vector<Mat>& P);

struct ExtendedSubgradientReport {
  std::vector<Vec> gradients;  // g_tk per subperiod
  std::vector<Vec> mu;         // recovered subgradient components
  double surrogate_cost = 0.0;
};

std::pair<SoarState, ExtendedSubgradientReport> soar_extended_step(
    const SoarState& state, const std::vector<CensoredObservation>& subobs, const NetworkConfig& cfg);

EpisodeResult run_soar_extended(const std::vector<std::vector<SubperiodSample>>& trace,
                                const InventoryVector& y1, const NetworkConfig& cfg,
                                double step_scale = 1.0);

// Value of the censored surrogate LP together with the duals of its
// fulfillment caps; exposed for the subgradient validity tests.
struct CensoredLpResult {
  double value = 0.0;
  Vec duals;  // base model: per location
  std::vector<Vec> duals_per_subperiod;
};
CensoredLpResult censored_surrogate_lp(const Vec& caps, const Mat& P, const NetworkConfig& cfg);
CensoredLpResult censored_surrogate_lp_extended(const std::vector<CensoredObservation>& subobs,
                                                const NetworkConfig& cfg);

}  // namespace soar
