#include "soar/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace soar {

FlowResult min_cost_flow(const Vec& delta, const NetworkConfig& cfg) {
  const int n = cfg.n;
  if (static_cast<int>(delta.size()) != n) throw std::invalid_argument("min_cost_flow: delta size");
  if (std::fabs(vec_sum(delta)) > kMassTol)
    throw std::invalid_argument("min_cost_flow: delta must sum to zero");

  // Variables f_ij laid out row-major; node balance as equality rows.
  LpProblem p(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.objective[i * n + j] = cfg.repo_cost(i, j);
  for (int j = 0; j < n; ++j) {
    Vec row(n * n, 0.0);
    for (int i = 0; i < n; ++i) row[i * n + j] += 1.0;  // inbound
    for (int k = 0; k < n; ++k) row[j * n + k] -= 1.0;  // outbound
    p.add_eq(std::move(row), delta[j]);
  }

  LpSolution sol = solve_with_duals(p);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("min_cost_flow: solve failed on a balanced instance");

  FlowResult res;
  res.value = sol.objective;
  res.flows = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) res.flows(i, j) = std::max(0.0, sol.primal[i * n + j]);
  return res;
}

double repositioning_cost(const Vec& delta, const NetworkConfig& cfg) {
  return min_cost_flow(delta, cfg).value;
}

InventoryVector project_simplex(const Vec& v, double K) {
  if (v.empty()) throw std::invalid_argument("project_simplex: empty input");
  if (K <= 0.0) throw std::invalid_argument("project_simplex: K must be positive");
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument("project_simplex: non-finite input");

  Vec sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0;
  double tau = 0.0;
  int rho = 0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double cand = (running - K) / static_cast<double>(k + 1);
    if (sorted[k] - cand > 0.0) {
      rho = static_cast<int>(k + 1);
      tau = cand;
    }
  }
  (void)rho;

  Vec w(v.size());
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    w[i] = std::max(v[i] - tau, 0.0);
    s += w[i];
  }
  // Renormalize the last ulps so the total is exact up to one rounding.
  if (s > 0.0 && std::fabs(s - K) > 0.0) {
    const double scale = K / s;
    for (double& x : w) x *= scale;
  }
  InventoryVector out{std::move(w), K};
  return out;
}

}  // namespace soar
