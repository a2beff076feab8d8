#include "soar/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "soar/dynamics.hpp"
#include "surrogate_lp.hpp"

namespace soar {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Modified cost when no repositioning happens: just the negated value of
// fulfilled demand.
double standstill_cost(const InventoryVector& x, const DemandSample& d, const NetworkConfig& cfg) {
  const Vec w = elementwise_min(x.values, d.demand);
  return -dot(detail::lost_sales_row_value(d.od_matrix, cfg), w);
}

}  // namespace

EpisodeResult run_nr(const std::vector<DemandSample>& trace, const InventoryVector& x1,
                     const NetworkConfig& cfg) {
  EpisodeResult ep;
  ep.algorithm = "NR";
  InventoryVector x = x1;
  for (const DemandSample& d : trace) {
    ep.policies.push_back(x);
    ep.period_costs.push_back(standstill_cost(x, d, cfg));
    ep.surrogate_costs.push_back(kNan);
    x = state_update(x, d);
  }
  ep.cumulative_cost = vec_sum(ep.period_costs);
  return ep;
}

EpisodeResult run_nr_extended(const std::vector<std::vector<SubperiodSample>>& trace,
                              const InventoryVector& x1, const NetworkConfig& cfg) {
  EpisodeResult ep;
  ep.algorithm = "NR";
  InventoryVector x = x1;
  for (const auto& subs : trace) {
    ep.policies.push_back(x);
    ExtendedPeriodOutcome outcome = extended_modified_cost(x, x, subs, cfg);
    ep.period_costs.push_back(outcome.cost);
    ep.surrogate_costs.push_back(kNan);
    x = outcome.end_inventory;
  }
  ep.cumulative_cost = vec_sum(ep.period_costs);
  return ep;
}

EpisodeResult run_fixed_policy(const InventoryVector& S, const std::vector<DemandSample>& trace,
                               const InventoryVector& x1, const NetworkConfig& cfg) {
  EpisodeResult ep;
  ep.algorithm = "OPT";
  InventoryVector x = x1;
  for (const DemandSample& d : trace) {
    ep.policies.push_back(S);
    ep.period_costs.push_back(modified_cost(x, S, d, cfg));
    ep.surrogate_costs.push_back(kNan);
    x = state_update(S, d);
  }
  ep.cumulative_cost = vec_sum(ep.period_costs);
  return ep;
}

EpisodeResult run_fixed_policy_extended(const InventoryVector& S,
                                        const std::vector<std::vector<SubperiodSample>>& trace,
                                        const InventoryVector& x1, const NetworkConfig& cfg) {
  EpisodeResult ep;
  ep.algorithm = "OPT";
  InventoryVector x = x1;
  for (const auto& subs : trace) {
    ep.policies.push_back(S);
    ExtendedPeriodOutcome outcome = extended_modified_cost(x, S, subs, cfg);
    ep.period_costs.push_back(outcome.cost);
    ep.surrogate_costs.push_back(kNan);
    x = outcome.end_inventory;
  }
  ep.cumulative_cost = vec_sum(ep.period_costs);
  return ep;
}

EpisodeResult run_otl(const std::vector<DemandSample>& trace, const InventoryVector& x1,
                      const NetworkConfig& cfg, const OtlConfig& otl, const UncensoredOracle& oracle,
                      OfflineMode mode) {
  const int n = cfg.n;
  const int T = static_cast<int>(trace.size());
  const int T0 = otl.exploration_samples;
  if (T0 < 1) throw std::invalid_argument("run_otl: exploration_samples must be >= 1");
  if (T <= n * T0) throw std::invalid_argument("run_otl: trace shorter than the exploration phase");

  EpisodeResult ep;
  InventoryVector x = x1;
  const double K = x1.total;

  // Exploration: at period t = n(s-1)+i all stock is parked at location i;
  // the oracle supplies the true demand there and row i of P_t.
  std::vector<DemandSample> constructed(T0);
  for (int s = 0; s < T0; ++s) {
    constructed[s].demand.assign(n, 0.0);
    constructed[s].od_matrix = Mat(n, n);
  }
  for (int s = 0; s < T0; ++s) {
    for (int i = 0; i < n; ++i) {
      const int t = n * s + i;  // 0-based period index
      InventoryVector y{Vec(n, 0.0), K};
      y.values[i] = K;
      ep.policies.push_back(y);
      ep.period_costs.push_back(modified_cost(x, y, trace[t], cfg));
      ep.surrogate_costs.push_back(kNan);
      const DemandSample& truth = oracle.sample(t);
      constructed[s].demand[i] = truth.demand[i];
      for (int j = 0; j < n; ++j) constructed[s].od_matrix(i, j) = truth.od_matrix(i, j);
      x = state_update(y, trace[t]);
    }
  }

  History h;
  h.initial_state = x1;
  h.samples = std::move(constructed);
  bool use_lp;
  switch (mode) {
    case OfflineMode::ForceLp:
      use_lp = true;
      break;
    case OfflineMode::ForceMilp:
      use_lp = false;
      break;
    default:
      use_lp = check_cost_condition(cfg, h);
  }
  const OfflineSolution learned = use_lp ? solve_offline_lp(h, cfg) : solve_offline_milp(h, cfg);
  ep.algorithm = use_lp ? "OTL-LP" : "OTL-MILP";

  for (int t = n * T0; t < T; ++t) {
    ep.policies.push_back(learned.base_stock);
    ep.period_costs.push_back(modified_cost(x, learned.base_stock, trace[t], cfg));
    ep.surrogate_costs.push_back(kNan);
    x = state_update(learned.base_stock, trace[t]);
  }
  ep.cumulative_cost = vec_sum(ep.period_costs);
  return ep;
}

EpisodeResult run_dl_uncensored(const std::vector<DemandSample>& trace, const InventoryVector& x1,
                                const NetworkConfig& cfg, const UncensoredOracle& oracle,
                                OfflineMode mode) {
  const int T = static_cast<int>(trace.size());
  EpisodeResult ep;
  ep.algorithm = "DL";
  InventoryVector x = x1;
  InventoryVector policy = x1;

  History h;
  h.initial_state = x1;

  int t = 1;  // 1-based period
  for (int epoch = 1; t <= T; ++epoch) {
    const int last = std::min((1 << epoch) - 1, T);
    for (; t <= last; ++t) {
      ep.policies.push_back(policy);
      ep.period_costs.push_back(modified_cost(x, policy, trace[t - 1], cfg));
      ep.surrogate_costs.push_back(kNan);
      x = state_update(policy, trace[t - 1]);
      h.samples.push_back(oracle.sample(t - 1));
    }
    if (t > T) break;
    bool use_lp;
    switch (mode) {
      case OfflineMode::ForceLp:
        use_lp = true;
        break;
      case OfflineMode::ForceMilp:
        use_lp = false;
        break;
      default:
        use_lp = check_cost_condition(cfg, h);
    }
    if (use_lp) {
      policy = solve_offline_lp(h, cfg).base_stock;
    } else {
      History capped = h;
      const int cap = SaaOptions{}.milp_sample_cap;
      if (static_cast<int>(capped.samples.size()) > cap) capped.samples.resize(cap);
      policy = solve_offline_milp(capped, cfg).base_stock;
    }
  }
  ep.cumulative_cost = vec_sum(ep.period_costs);
  return ep;
}

}  // namespace soar
