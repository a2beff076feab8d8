#include "soar/online.hpp"

#include <cmath>
#include <stdexcept>

#include "soar/dynamics.hpp"
#include "soar/flow.hpp"
#include "surrogate_lp.hpp"

namespace soar {

CensoredLpResult censored_surrogate_lp(const Vec& caps, const Mat& P, const NetworkConfig& cfg) {
  const int n = cfg.n;
  if (static_cast<int>(caps.size()) != n) throw std::invalid_argument("censored_surrogate_lp: size");

  // variables: xi (n*n) then w (n)
  LpProblem p(n * n + n);
  const int w0 = n * n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.objective[i * n + j] = cfg.repo_cost(i, j);
  const Vec lp_row = detail::lost_sales_row_value(P, cfg);
  for (int i = 0; i < n; ++i) p.objective[w0 + i] = -lp_row[i];

  for (int j = 0; j < n; ++j) {
    Vec row(p.num_vars, 0.0);
    for (int i = 0; i < n; ++i) row[i * n + j] += 1.0;
    for (int k = 0; k < n; ++k) row[j * n + k] -= 1.0;
    row[w0 + j] -= 1.0;
    for (int i = 0; i < n; ++i) row[w0 + i] += P(i, j);
    p.add_eq(std::move(row), 0.0);
  }
  for (int i = 0; i < n; ++i) {
    Vec row(p.num_vars, 0.0);
    row[w0 + i] = 1.0;
    p.add_ub(std::move(row), caps[i]);
  }

  LpSolution sol = solve_with_duals(p);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("censored_surrogate_lp: LP solve failed");
  CensoredLpResult out;
  out.value = sol.objective;
  out.duals = sol.duals_ub;
  return out;
}

std::pair<SoarState, SubgradientReport> soar_step(const SoarState& state,
                                                  const CensoredObservation& obs,
                                                  const NetworkConfig& cfg) {
  if (state.policy.n() != cfg.n || obs.n() != cfg.n)
    throw std::invalid_argument("soar_step: dimension mismatch");
  if (state.period < 1) throw std::invalid_argument("soar_step: period must be >= 1");

  CensoredLpResult lp = censored_surrogate_lp(obs.fulfilled, obs.od_matrix, cfg);

  SubgradientReport report;
  report.duals = lp.duals;
  report.surrogate_cost = lp.value;
  report.gradient.assign(cfg.n, 0.0);
  for (int i = 0; i < cfg.n; ++i)
    if (obs.binding[i]) report.gradient[i] = lp.duals[i];

  const double step = state.step_scale / std::sqrt(static_cast<double>(state.period));
  Vec moved = state.policy.values;
  for (int i = 0; i < cfg.n; ++i) moved[i] -= step * report.gradient[i];

  SoarState next;
  next.period = state.period + 1;
  next.step_scale = state.step_scale;
  next.policy = project_simplex(moved, state.policy.total);
  return {std::move(next), std::move(report)};
}

EpisodeResult run_soar(const std::vector<DemandSample>& trace, const InventoryVector& y1,
                       const NetworkConfig& cfg, double step_scale) {
  if (trace.empty()) throw std::invalid_argument("run_soar: empty trace");
  y1.validate();

  EpisodeResult ep;
  ep.algorithm = "SOAR";
  SoarState state{1, y1, step_scale};
  InventoryVector x = y1;  // the initial stock already sits at the initial policy
  for (const DemandSample& d : trace) {
    const InventoryVector y = state.policy;
    ep.policies.push_back(y);
    ep.period_costs.push_back(modified_cost(x, y, d, cfg));
    const CensoredObservation obs = censor(y, d);
    auto [next, report] = soar_step(state, obs, cfg);
    ep.surrogate_costs.push_back(report.surrogate_cost);
    x = state_update(y, d);
    state = std::move(next);
  }
  ep.cumulative_cost = vec_sum(ep.period_costs);
  return ep;
}

std::vector<Vec> recover_subgradients(const std::vector<Vec>& g, const std::vector<Mat>& P) {
  const int H = static_cast<int>(g.size());
  if (H < 1 || P.size() != g.size())
    throw std::invalid_argument("recover_subgradients: need one OD matrix per subperiod");
  const int n = static_cast<int>(g.front().size());

  // residual fractions per subperiod
  std::vector<Vec> r(H);
  for (int k = 0; k < H; ++k) {
    r[k] = P[k].row_sums();
    for (double& x : r[k]) x = 1.0 - x;
  }
  auto prod = [&](int a, int b, int i) {  // product of residuals over [a, b]
    double p = 1.0;
    for (int u = a; u <= b; ++u) p *= r[u][i];
    return p;
  };

  std::vector<Vec> mu(H, Vec(n, 0.0));
  Vec tail(n, 0.0);  // sum of mu_l for l > k
  for (int k = H - 1; k >= 0; --k) {
    Vec m = g[k];
    // subtract (I - P_k) tail
    const Vec p_tail = P[k].times(tail);
    for (int i = 0; i < n; ++i) m[i] -= tail[i] - p_tail[i];
    // add back the outstanding-mediated terms
    for (int l = k + 2; l < H; ++l) {
      for (int s = k + 1; s <= l - 1; ++s) {
        const Vec ps_mul = P[s].times(mu[l]);
        for (int i = 0; i < n; ++i) m[i] += ps_mul[i] * prod(k, s - 1, i);
      }
    }
    mu[k] = std::move(m);
    for (int i = 0; i < n; ++i) tail[i] += mu[k][i];
  }
  return mu;
}

CensoredLpResult censored_surrogate_lp_extended(const std::vector<CensoredObservation>& subobs,
                                                const NetworkConfig& cfg) {
  if (subobs.empty()) throw std::invalid_argument("censored_surrogate_lp_extended: no observations");
  const int H = static_cast<int>(subobs.size());

  std::vector<SubperiodSample> subs(H);
  std::vector<Vec> caps(H);
  for (int k = 0; k < H; ++k) {
    subs[k].demand = subobs[k].fulfilled;
    subs[k].od_matrix = subobs[k].od_matrix;
    caps[k] = subobs[k].fulfilled;
  }
  detail::ExtendedLpLayout lay =
      detail::build_extended_lp(Vec(cfg.n, 0.0), subs, caps, /*with_y_rows=*/false, cfg);
  LpSolution sol = solve_with_duals(lay.lp);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("censored_surrogate_lp_extended: LP solve failed");

  CensoredLpResult out;
  out.value = sol.objective;
  out.duals_per_subperiod.resize(H);
  for (int k = 0; k < H; ++k) {
    out.duals_per_subperiod[k].resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i)
      out.duals_per_subperiod[k][i] = sol.duals_ub[lay.cap_row(k, i)];
  }
  return out;
}

std::pair<SoarState, ExtendedSubgradientReport> soar_extended_step(
    const SoarState& state, const std::vector<CensoredObservation>& subobs, const NetworkConfig& cfg) {
  if (subobs.empty()) throw std::invalid_argument("soar_extended_step: no observations");
  const int H = static_cast<int>(subobs.size());

  CensoredLpResult lp = censored_surrogate_lp_extended(subobs, cfg);

  ExtendedSubgradientReport report;
  report.surrogate_cost = lp.value;
  report.gradients.resize(H);
  std::vector<Mat> P(H);
  for (int k = 0; k < H; ++k) {
    P[k] = subobs[k].od_matrix;
    report.gradients[k].assign(cfg.n, 0.0);
    for (int i = 0; i < cfg.n; ++i)
      if (subobs[k].binding[i]) report.gradients[k][i] = lp.duals_per_subperiod[k][i];
  }
  report.mu = recover_subgradients(report.gradients, P);

  const double step =
      state.step_scale / (static_cast<double>(H) * std::sqrt(static_cast<double>(state.period)));
  Vec moved = state.policy.values;
  for (int k = 0; k < H; ++k)
    for (int i = 0; i < cfg.n; ++i) moved[i] -= step * report.mu[k][i];

  SoarState next;
  next.period = state.period + 1;
  next.step_scale = state.step_scale;
  next.policy = project_simplex(moved, state.policy.total);
  return {std::move(next), std::move(report)};
}

EpisodeResult run_soar_extended(const std::vector<std::vector<SubperiodSample>>& trace,
                                const InventoryVector& y1, const NetworkConfig& cfg,
                                double step_scale) {
  if (trace.empty()) throw std::invalid_argument("run_soar_extended: empty trace");
  y1.validate();

  EpisodeResult ep;
  ep.algorithm = "SOAR-Extended";
  SoarState state{1, y1, step_scale};
  InventoryVector x = y1;
  for (const auto& subs : trace) {
    const InventoryVector y = state.policy;
    ep.policies.push_back(y);
    ExtendedPeriodOutcome outcome = extended_modified_cost(x, y, subs, cfg);
    ep.period_costs.push_back(outcome.cost);
    auto [next, report] = soar_extended_step(state, outcome.observations, cfg);
    ep.surrogate_costs.push_back(report.surrogate_cost);
    x = outcome.end_inventory;
    state = std::move(next);
  }
  ep.cumulative_cost = vec_sum(ep.period_costs);
  return ep;
}

}  // namespace soar
