#include "soar/offline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>

#include "soar/flow.hpp"
#include "surrogate_lp.hpp"

namespace soar {

using detail::ExtendedLpLayout;
using detail::build_extended_lp;
using detail::lost_sales_row_value;

void History::validate() const {
  initial_state.validate();
  if (samples.empty() && extended_samples.empty())
    throw std::invalid_argument("History: no samples");
  if (!samples.empty() && !extended_samples.empty())
    throw std::invalid_argument("History: mixed base and extended samples");
  const int nn = n();
  for (const DemandSample& s : samples)
    if (s.n() != nn) throw std::invalid_argument("History: inconsistent dimension");
  for (const auto& subs : extended_samples) {
    if (subs.empty()) throw std::invalid_argument("History: empty subperiod list");
    for (const SubperiodSample& s : subs)
      if (s.n() != nn) throw std::invalid_argument("History: inconsistent dimension");
  }
}

bool check_cost_condition(const NetworkConfig& cfg, const std::vector<Mat>& od_matrices) {
  constexpr double slack = 1e-12;
  for (const Mat& P : od_matrices) {
    for (int j = 0; j < cfg.n; ++j) {
      double lhs = 0.0, rhs = 0.0;
      for (int i = 0; i < cfg.n; ++i) {
        lhs += cfg.lost_sales(j, i) * P(j, i);
        rhs += P(j, i) * cfg.repo_cost(i, j);
      }
      if (lhs < rhs - slack) return false;
    }
  }
  return true;
}

bool check_cost_condition(const NetworkConfig& cfg, const History& h) {
  std::vector<Mat> mats;
  for (const DemandSample& s : h.samples) mats.push_back(s.od_matrix);
  for (const auto& subs : h.extended_samples)
    for (const SubperiodSample& s : subs) mats.push_back(s.od_matrix);
  return check_cost_condition(cfg, mats);
}

SurrogateValue surrogate_value_two_caps(const Vec& y, const DemandSample& d, const NetworkConfig& cfg) {
  const int n = cfg.n;
  // variables: xi (n*n) then w (n)
  LpProblem p(n * n + n);
  const int w0 = n * n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.objective[i * n + j] = cfg.repo_cost(i, j);
  const Vec lp_row = lost_sales_row_value(d.od_matrix, cfg);
  for (int i = 0; i < n; ++i) p.objective[w0 + i] = -lp_row[i];

  for (int j = 0; j < n; ++j) {
    Vec row(p.num_vars, 0.0);
    for (int i = 0; i < n; ++i) row[i * n + j] += 1.0;
    for (int k = 0; k < n; ++k) row[j * n + k] -= 1.0;
    row[w0 + j] -= 1.0;
    for (int i = 0; i < n; ++i) row[w0 + i] += d.od_matrix(i, j);
    p.add_eq(std::move(row), 0.0);
  }
  for (int i = 0; i < n; ++i) {  // w <= d
    Vec row(p.num_vars, 0.0);
    row[w0 + i] = 1.0;
    p.add_ub(std::move(row), d.demand[i]);
  }
  for (int i = 0; i < n; ++i) {  // w <= y
    Vec row(p.num_vars, 0.0);
    row[w0 + i] = 1.0;
    p.add_ub(std::move(row), y[i]);
  }

  LpSolution sol = solve_with_duals(p);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("surrogate_value_two_caps: LP solve failed");
  SurrogateValue out;
  out.value = sol.objective;
  out.subgradient.assign(sol.duals_ub.begin() + n, sol.duals_ub.end());
  out.w.assign(sol.primal.begin() + w0, sol.primal.end());
  return out;
}

SurrogateValue surrogate_value_two_caps_extended(const Vec& y, const std::vector<SubperiodSample>& subs,
                                                 const NetworkConfig& cfg) {
  std::vector<Vec> caps;
  for (const SubperiodSample& s : subs) caps.push_back(s.demand);
  ExtendedLpLayout lay = build_extended_lp(y, subs, caps, /*with_y_rows=*/true, cfg);
  LpSolution sol = solve_with_duals(lay.lp);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("surrogate_value_two_caps_extended: LP solve failed");

  SurrogateValue out;
  out.value = sol.objective;
  out.subgradient.assign(cfg.n, 0.0);
  for (int k = 0; k < lay.H; ++k)
    for (int i = 0; i < cfg.n; ++i) out.subgradient[i] += sol.duals_ub[lay.ycap_row(k, i)];
  out.w.assign(sol.primal.begin() + cfg.n * cfg.n, sol.primal.end());
  return out;
}

double offline_objective_at(const InventoryVector& S, const History& h, const NetworkConfig& cfg) {
  double total = 0.0;
  if (!h.is_extended()) {
    for (const DemandSample& d : h.samples) {
      const Vec w = elementwise_min(S.values, d.demand);
      const Vec returned = d.od_matrix.transpose_times(w);
      total += repositioning_cost(vec_sub(w, returned), cfg);
      total -= dot(lost_sales_row_value(d.od_matrix, cfg), w);
    }
    return total;
  }
  for (const auto& subs : h.extended_samples) {
    ExtendedState state{S.values, Vec(S.n(), 0.0)};
    for (const SubperiodSample& sub : subs) {
      const Vec w = elementwise_min(state.on_hand, sub.demand);
      total -= dot(lost_sales_row_value(sub.od_matrix, cfg), w);
      state = state_update_extended(state, sub);
    }
    // Prop-F.1 flow input: S minus end-of-period on-hand stock.
    total += repositioning_cost(vec_sub(S.values, state.on_hand), cfg);
  }
  return total;
}

namespace {

struct CutOracle {
  virtual ~CutOracle() = default;
  // value and a subgradient of the offline objective at S
  virtual std::pair<double, Vec> eval(const Vec& S) = 0;
};

struct BaseOracle final : CutOracle {
  const History& h;
  const NetworkConfig& cfg;
  BaseOracle(const History& hh, const NetworkConfig& cc) : h(hh), cfg(cc) {}
  std::pair<double, Vec> eval(const Vec& S) override {
    double f = 0.0;
    Vec g(cfg.n, 0.0);
    for (const DemandSample& d : h.samples) {
      SurrogateValue v = surrogate_value_two_caps(S, d, cfg);
      f += v.value;
      for (int i = 0; i < cfg.n; ++i) g[i] += v.subgradient[i];
    }
    return {f, g};
  }
};

struct ExtendedOracle final : CutOracle {
  const History& h;
  const NetworkConfig& cfg;
  ExtendedOracle(const History& hh, const NetworkConfig& cc) : h(hh), cfg(cc) {}
  std::pair<double, Vec> eval(const Vec& S) override {
    double f = 0.0;
    Vec g(cfg.n, 0.0);
    for (const auto& subs : h.extended_samples) {
      SurrogateValue v = surrogate_value_two_caps_extended(S, subs, cfg);
      f += v.value;
      for (int i = 0; i < cfg.n; ++i) g[i] += v.subgradient[i];
    }
    return {f, g};
  }
};

struct KelleyResult {
  Vec S;
  double value = 0.0;
  double gap = 0.0;
};

// Cutting planes over the simplex with in-out stabilization: cuts are placed
// at points pulled toward the incumbent, which tames Kelley oscillation.
KelleyResult kelley_minimize(CutOracle& oracle, int n, double K, double rel_tol, int max_iter) {
  struct Cut {
    Vec g;
    double intercept;  // f_k - g_k . S_k
  };
  std::vector<Cut> cuts;

  Vec best_S(n, K / n);
  auto [best_f, g0] = oracle.eval(best_S);
  cuts.push_back({g0, best_f - dot(g0, best_S)});

  double lb = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    // master: min theta  s.t.  theta >= g.S + intercept for all cuts, S in simplex
    LpProblem master(n + 2);  // S, theta+, theta-
    master.objective[n] = 1.0;
    master.objective[n + 1] = -1.0;
    {
      Vec row(master.num_vars, 0.0);
      for (int i = 0; i < n; ++i) row[i] = 1.0;
      master.add_eq(std::move(row), K);
    }
    for (const Cut& c : cuts) {
      Vec row(master.num_vars, 0.0);
      for (int i = 0; i < n; ++i) row[i] = c.g[i];
      row[n] = -1.0;
      row[n + 1] = 1.0;
      master.add_ub(std::move(row), -c.intercept);
    }
    LpSolution sol = solve_with_duals(master);
    if (sol.status != LpStatus::Optimal)
      throw std::runtime_error("solve_offline_lp: cutting-plane master failed");
    lb = std::max(lb, sol.objective);
    gap = best_f - lb;
    if (gap <= rel_tol * std::max(1.0, std::fabs(best_f))) break;

    Vec S_master(sol.primal.begin(), sol.primal.begin() + n);
    // pull the trial point toward the incumbent; probe the raw master point
    // every few rounds to keep the lower bound moving
    Vec trial(n);
    const double lambda = (it % 5 == 4) ? 1.0 : 0.6;
    for (int i = 0; i < n; ++i) trial[i] = lambda * S_master[i] + (1.0 - lambda) * best_S[i];

    auto [f, g] = oracle.eval(trial);
    cuts.push_back({g, f - dot(g, trial)});
    if (f < best_f) {
      best_f = f;
      best_S = trial;
    }
  }
  return {best_S, best_f, std::max(gap, 0.0)};
}

constexpr double kDirectCellBudget = 2.5e6;

bool direct_lp_fits(const History& h, int n) {
  const double t = h.size();
  double vars, eq, ub;
  if (!h.is_extended()) {
    vars = n + t * n + t * n * n;
    eq = t * n + 1;
    ub = 2 * t * n;
  } else {
    const double H = static_cast<double>(h.extended_samples.front().size());
    vars = n + t * (n * n + H * n);
    eq = t * n + 1;
    ub = 2 * t * H * n;
  }
  return (eq + ub + 2) * (vars + eq + ub) <= kDirectCellBudget;
}

struct DirectLpResult {
  Vec S;
  double objective;
  Vec w;  // base model only; fulfillment per (sample, location)
};

DirectLpResult solve_offline_lp_direct(const History& h, const NetworkConfig& cfg) {
  const int n = cfg.n;
  const int t = h.size();
  const double K = h.initial_state.total;

  // variables: S (n), w (t*n), xi (t*n*n)
  LpProblem p(n + t * n + t * n * n);
  auto w_var = [&](int s, int i) { return n + s * n + i; };
  auto xi_var = [&](int s, int i, int j) { return n + t * n + s * n * n + i * n + j; };

  for (int s = 0; s < t; ++s) {
    const Vec lp_row = lost_sales_row_value(h.samples[s].od_matrix, cfg);
    for (int i = 0; i < n; ++i) p.objective[w_var(s, i)] = -lp_row[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) p.objective[xi_var(s, i, j)] = cfg.repo_cost(i, j);
  }
  {
    Vec row(p.num_vars, 0.0);
    for (int i = 0; i < n; ++i) row[i] = 1.0;
    p.add_eq(std::move(row), K);
  }
  for (int s = 0; s < t; ++s) {
    const Mat& P = h.samples[s].od_matrix;
    for (int j = 0; j < n; ++j) {
      Vec row(p.num_vars, 0.0);
      for (int i = 0; i < n; ++i) row[xi_var(s, i, j)] += 1.0;
      for (int k = 0; k < n; ++k) row[xi_var(s, j, k)] -= 1.0;
      row[w_var(s, j)] -= 1.0;
      for (int i = 0; i < n; ++i) row[w_var(s, i)] += P(i, j);
      p.add_eq(std::move(row), 0.0);
    }
    for (int i = 0; i < n; ++i) {
      Vec row(p.num_vars, 0.0);
      row[w_var(s, i)] = 1.0;
      p.add_ub(std::move(row), h.samples[s].demand[i]);
    }
    for (int i = 0; i < n; ++i) {
      Vec row(p.num_vars, 0.0);
      row[w_var(s, i)] = 1.0;
      row[i] = -1.0;
      p.add_ub(std::move(row), 0.0);
    }
  }

  LpSolution sol = solve_with_duals(p);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("solve_offline_lp: direct LP solve failed");
  DirectLpResult res;
  res.S.assign(sol.primal.begin(), sol.primal.begin() + n);
  res.objective = sol.objective;
  res.w.assign(sol.primal.begin() + n, sol.primal.begin() + n + t * n);
  return res;
}

DirectLpResult solve_offline_lp_direct_extended(const History& h, const NetworkConfig& cfg) {
  const int n = cfg.n;
  const int t = h.size();
  const double K = h.initial_state.total;

  // One per-sample block (xi, w) after another, S first. The per-sample rows
  // reuse the substituted extended layout shifted into the block.
  int vars = n;
  std::vector<int> block_offset(t);
  std::vector<ExtendedLpLayout> blocks;
  for (int s = 0; s < t; ++s) {
    std::vector<Vec> caps;
    for (const SubperiodSample& sub : h.extended_samples[s]) caps.push_back(sub.demand);
    blocks.push_back(build_extended_lp(Vec(n, 0.0), h.extended_samples[s], caps,
                                       /*with_y_rows=*/true, cfg));
    block_offset[s] = vars;
    vars += blocks[s].lp.num_vars;
  }

  LpProblem p(vars);
  {
    Vec row(p.num_vars, 0.0);
    for (int i = 0; i < n; ++i) row[i] = 1.0;
    p.add_eq(std::move(row), K);
  }
  for (int s = 0; s < t; ++s) {
    const LpProblem& b = blocks[s].lp;
    const int off = block_offset[s];
    for (int v = 0; v < b.num_vars; ++v) p.objective[off + v] = b.objective[v];
    for (size_t r = 0; r < b.eq_rows.size(); ++r) {
      Vec row(p.num_vars, 0.0);
      for (int v = 0; v < b.num_vars; ++v) row[off + v] = b.eq_rows[r][v];
      p.add_eq(std::move(row), b.eq_rhs[r]);
    }
    const int H = blocks[s].H;
    for (size_t r = 0; r < b.ub_rows.size(); ++r) {
      Vec row(p.num_vars, 0.0);
      for (int v = 0; v < b.num_vars; ++v) row[off + v] = b.ub_rows[r][v];
      double rhs = b.ub_rhs[r];
      if (static_cast<int>(r) >= H * n) {
        // y-cap row: move S to the left-hand side
        const int i = (static_cast<int>(r) - H * n) % n;
        row[i] = -1.0;
        rhs = 0.0;
      }
      p.add_ub(std::move(row), rhs);
    }
  }

  LpSolution sol = solve_with_duals(p);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("solve_offline_lp: direct extended LP solve failed");
  DirectLpResult res;
  res.S.assign(sol.primal.begin(), sol.primal.begin() + n);
  res.objective = sol.objective;
  return res;
}

}  // namespace

OfflineSolution solve_offline_lp(const History& h, const NetworkConfig& cfg) {
  h.validate();
  if (h.n() != cfg.n) throw std::invalid_argument("solve_offline_lp: dimension mismatch");
  const bool condition_ok = check_cost_condition(cfg, h);
  if (!condition_ok)
    std::cerr << "solve_offline_lp: warning: cost condition fails; LP value understates "
                 "the forced-fulfillment objective\n";

  OfflineSolution out;
  out.solver_kind = OfflineSolverKind::Lp;
  const double K = h.initial_state.total;

  if (direct_lp_fits(h, cfg.n)) {
    DirectLpResult res = h.is_extended() ? solve_offline_lp_direct_extended(h, cfg)
                                         : solve_offline_lp_direct(h, cfg);
    out.base_stock = project_simplex(res.S, K);
    out.objective = res.objective;
    out.optimality_gap = 0.0;
    if (condition_ok && !h.is_extended()) {
      // the proof guarantees w = min(d, S) at some optimum; accept an
      // alternate optimum only if it attains the same objective
      double max_dev = 0.0;
      for (int s = 0; s < h.size(); ++s)
        for (int i = 0; i < cfg.n; ++i) {
          const double want = std::min(h.samples[s].demand[i], out.base_stock.values[i]);
          max_dev = std::max(max_dev, std::fabs(res.w[s * cfg.n + i] - want));
        }
      if (max_dev > 1e-6) {
        const double forced = offline_objective_at(out.base_stock, h, cfg);
        if (std::fabs(forced - out.objective) > 1e-6 * std::max(1.0, std::fabs(out.objective)))
          throw std::runtime_error("solve_offline_lp: optimum violates w = min(d, S)");
      }
    }
    return out;
  }

  std::unique_ptr<CutOracle> oracle;
  if (h.is_extended())
    oracle = std::make_unique<ExtendedOracle>(h, cfg);
  else
    oracle = std::make_unique<BaseOracle>(h, cfg);
  KelleyResult res = kelley_minimize(*oracle, cfg.n, K, 1e-8, 600);
  out.base_stock = project_simplex(res.S, K);
  out.objective = res.value;
  out.optimality_gap = res.gap;
  if (condition_ok) {
    const double forced = offline_objective_at(out.base_stock, h, cfg);
    if (std::fabs(forced - out.objective) > 1e-5 * std::max(1.0, std::fabs(out.objective)) + 1e-7)
      throw std::runtime_error("solve_offline_lp: LP value and forced fulfillment diverge");
  }
  return out;
}

// ---------------------------------------------------------------------------
// MILP encoding and branch and bound
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<int>> sorted_sample_order(const History& h) {
  const int t = h.size();
  const int n = h.n();
  std::vector<std::vector<int>> order(n);
  for (int i = 0; i < n; ++i) {
    order[i].resize(t);
    std::iota(order[i].begin(), order[i].end(), 0);
    std::stable_sort(order[i].begin(), order[i].end(), [&](int a, int b) {
      return h.samples[a].demand[i] < h.samples[b].demand[i];
    });
  }
  return order;
}

}  // namespace

MilpEncoding build_offline_milp_encoding(const History& h, const NetworkConfig& cfg) {
  h.validate();
  if (h.is_extended())
    throw std::invalid_argument("build_offline_milp_encoding: base-model histories only");
  if (std::fabs(h.initial_state.total - 1.0) > kMassTol)
    throw std::invalid_argument("build_offline_milp_encoding: requires unit total inventory");
  const int n = cfg.n;
  const int t = h.size();

  MilpEncoding enc;
  enc.t = t;
  enc.n = n;
  enc.sort_order = sorted_sample_order(h);
  enc.lp = LpProblem(n + t * n + t * n * n + (t + 1) * n);
  LpProblem& p = enc.lp;

  for (int s = 0; s < t; ++s) {
    const Vec lp_row = lost_sales_row_value(h.samples[s].od_matrix, cfg);
    for (int i = 0; i < n; ++i) p.objective[enc.m_var(s, i)] = -lp_row[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) p.objective[enc.xi_var(s, i, j)] = cfg.repo_cost(i, j);
  }

  {
    Vec row(p.num_vars, 0.0);
    for (int i = 0; i < n; ++i) row[enc.s_var(i)] = 1.0;
    p.add_eq(std::move(row), 1.0);
  }
  for (int s = 0; s < t; ++s) {
    const Mat& P = h.samples[s].od_matrix;
    for (int j = 0; j < n; ++j) {
      Vec row(p.num_vars, 0.0);
      for (int i = 0; i < n; ++i) row[enc.xi_var(s, i, j)] += 1.0;
      for (int k = 0; k < n; ++k) row[enc.xi_var(s, j, k)] -= 1.0;
      row[enc.m_var(s, j)] -= 1.0;
      for (int i = 0; i < n; ++i) row[enc.m_var(s, i)] += P(i, j);
      p.add_eq(std::move(row), 0.0);
    }
  }

  for (int i = 0; i < n; ++i) {
    const auto& ord = enc.sort_order[i];
    auto sorted_demand = [&](int pos) { return h.samples[ord[pos]].demand[i]; };  // 0-based pos

    // exactly one segment indicator per location
    {
      Vec row(p.num_vars, 0.0);
      for (int k = 0; k <= t; ++k) row[enc.z_var(k, i)] = 1.0;
      p.add_eq(std::move(row), 1.0);
    }
    // segment bounds: sum_s z_{s+1} d~_s <= S_i <= sum_s z_s d~_s + z_{t+1}
    {
      Vec row(p.num_vars, 0.0);
      row[enc.s_var(i)] = -1.0;
      for (int pos = 0; pos < t; ++pos) row[enc.z_var(pos + 1, i)] = sorted_demand(pos);
      p.add_ub(std::move(row), 0.0);
    }
    {
      Vec row(p.num_vars, 0.0);
      row[enc.s_var(i)] = 1.0;
      for (int pos = 0; pos < t; ++pos) row[enc.z_var(pos, i)] = -sorted_demand(pos);
      row[enc.z_var(t, i)] = -1.0;
      p.add_ub(std::move(row), 0.0);
    }
    // big-M links: z_{s'} = 1 with s' <= s forces m~_s = S_i
    for (int sp = 0; sp < t; ++sp) {
      for (int s = sp; s < t; ++s) {
        const int mv = enc.m_var(ord[s], i);
        Vec row(p.num_vars, 0.0);
        row[mv] = 1.0;
        row[enc.s_var(i)] = -1.0;
        row[enc.z_var(sp, i)] = 2.0;
        p.add_ub(row, 2.0);
        row[mv] = -1.0;
        row[enc.s_var(i)] = 1.0;
        p.add_ub(std::move(row), 2.0);
      }
    }
    // z_{s'} = 1 with s' > s forces m~_s = d~_s
    for (int s = 0; s < t; ++s) {
      for (int sp = s + 1; sp <= t; ++sp) {
        const int mv = enc.m_var(ord[s], i);
        Vec row(p.num_vars, 0.0);
        row[mv] = 1.0;
        row[enc.z_var(sp, i)] = 2.0;
        p.add_ub(row, 2.0 + sorted_demand(s));
        row[mv] = -1.0;
        p.add_ub(std::move(row), 2.0 - sorted_demand(s));
      }
    }
    // relaxed binaries
    for (int k = 0; k <= t; ++k) {
      Vec row(p.num_vars, 0.0);
      row[enc.z_var(k, i)] = 1.0;
      p.add_ub(std::move(row), 1.0);
    }
    {
      Vec row(p.num_vars, 0.0);
      row[enc.s_var(i)] = 1.0;
      p.add_ub(std::move(row), 1.0);
    }
  }
  return enc;
}

namespace {

// Branch-and-bound node: per-location range of admissible segments,
// 1-based k in [1, t+1] meaning S_i lies between sorted demands k-1 and k.
struct BnbNode {
  std::vector<int> lo, hi;
  double bound = -std::numeric_limits<double>::infinity();
  Vec relaxed_S;
  bool exact = false;
  long id = 0;
};

struct NodeLp {
  double bound = 0.0;
  Vec S;
  bool feasible = false;
  bool exact = false;  // no free fulfillment variables remained
};

class MilpBnb {
 public:
  MilpBnb(const History& h, const NetworkConfig& cfg) : h_(h), cfg_(cfg), n_(cfg.n), t_(h.size()) {
    order_ = sorted_sample_order(h);
    thresholds_.assign(n_, Vec(t_ + 2, 0.0));
    for (int i = 0; i < n_; ++i) {
      for (int pos = 1; pos <= t_; ++pos)
        thresholds_[i][pos] = h.samples[order_[i][pos - 1]].demand[i];
      thresholds_[i][t_ + 1] = 1.0;
    }
  }

  // LP over the convex hull of { m~ = min(S, d~) } on the node's segment box.
  NodeLp solve_node(const BnbNode& node) const {
    NodeLp out;
    std::vector<double> lo_val(n_), hi_val(n_);
    for (int i = 0; i < n_; ++i) {
      lo_val[i] = thresholds_[i][node.lo[i] - 1];
      hi_val[i] = std::min(thresholds_[i][node.hi[i]], 1.0);
      if (lo_val[i] > hi_val[i] + 1e-12 || lo_val[i] > 1.0 + 1e-12) return out;  // empty box
    }

    // classify each (location, sorted position): below the box -> constant
    // d~, above -> equals S, inside -> free variable with hull rows
    enum class MKind { ConstD, EqualS, Free };
    std::vector<std::vector<MKind>> kind(n_, std::vector<MKind>(t_));
    int free_count = 0;
    for (int i = 0; i < n_; ++i) {
      for (int pos = 0; pos < t_; ++pos) {
        const double dv = thresholds_[i][pos + 1];
        if (dv <= lo_val[i] + 1e-12)
          kind[i][pos] = MKind::ConstD;
        else if (dv >= hi_val[i] - 1e-12)
          kind[i][pos] = MKind::EqualS;
        else {
          kind[i][pos] = MKind::Free;
          ++free_count;
        }
      }
    }

    // variables: S (n), free m (free_count), xi (t*n*n)
    const int nfree = free_count;
    std::vector<std::vector<int>> free_var(n_, std::vector<int>(t_, -1));
    int next = n_;
    for (int i = 0; i < n_; ++i)
      for (int pos = 0; pos < t_; ++pos)
        if (kind[i][pos] == MKind::Free) free_var[i][pos] = next++;
    const int xi0 = n_ + nfree;
    LpProblem p(xi0 + t_ * n_ * n_);
    auto xi_var = [&](int s, int i, int j) { return xi0 + s * n_ * n_ + i * n_ + j; };

    // objective: flow costs plus lost-sales value of each m
    for (int s = 0; s < t_; ++s)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) p.objective[xi_var(s, i, j)] = cfg_.repo_cost(i, j);
    double const_obj = 0.0;
    // m-variable resolution: sample s, location i sits at sorted position
    std::vector<std::vector<int>> pos_of(n_, std::vector<int>(t_));
    for (int i = 0; i < n_; ++i)
      for (int pos = 0; pos < t_; ++pos) pos_of[i][order_[i][pos]] = pos;

    std::vector<Vec> lp_rows;
    for (int s = 0; s < t_; ++s) lp_rows.push_back(lost_sales_row_value(h_.samples[s].od_matrix, cfg_));

    // helper applying coefficient c * m_{s,i} into a row / objective triple
    auto apply_m = [&](Vec& row, double& rhs, double coef, int s, int i) {
      const int pos = pos_of[i][s];
      switch (kind[i][pos]) {
        case MKind::ConstD:
          rhs -= coef * thresholds_[i][pos + 1];
          break;
        case MKind::EqualS:
          row[i] += coef;
          break;
        case MKind::Free:
          row[free_var[i][pos]] += coef;
          break;
      }
    };

    for (int s = 0; s < t_; ++s) {
      for (int i = 0; i < n_; ++i) {
        const double coef = -lp_rows[s][i];
        const int pos = pos_of[i][s];
        switch (kind[i][pos]) {
          case MKind::ConstD:
            const_obj += coef * thresholds_[i][pos + 1];
            break;
          case MKind::EqualS:
            p.objective[i] += coef;
            break;
          case MKind::Free:
            p.objective[free_var[i][pos]] += coef;
            break;
        }
      }
    }

    {
      Vec row(p.num_vars, 0.0);
      for (int i = 0; i < n_; ++i) row[i] = 1.0;
      p.add_eq(std::move(row), 1.0);
    }
    for (int s = 0; s < t_; ++s) {
      const Mat& P = h_.samples[s].od_matrix;
      for (int j = 0; j < n_; ++j) {
        Vec row(p.num_vars, 0.0);
        double rhs = 0.0;
        for (int i = 0; i < n_; ++i) row[xi_var(s, i, j)] += 1.0;
        for (int k = 0; k < n_; ++k) row[xi_var(s, j, k)] -= 1.0;
        apply_m(row, rhs, -1.0, s, j);
        for (int i = 0; i < n_; ++i)
          if (P(i, j) != 0.0) apply_m(row, rhs, P(i, j), s, i);
        p.add_eq(std::move(row), rhs);
      }
    }
    // S box plus hull rows for free positions
    for (int i = 0; i < n_; ++i) {
      {
        Vec row(p.num_vars, 0.0);
        row[i] = 1.0;
        p.add_ub(std::move(row), hi_val[i]);
      }
      if (lo_val[i] > 0.0) {
        Vec row(p.num_vars, 0.0);
        row[i] = -1.0;
        p.add_ub(std::move(row), -lo_val[i]);
      }
      for (int pos = 0; pos < t_; ++pos) {
        if (kind[i][pos] != MKind::Free) continue;
        const int mv = free_var[i][pos];
        const double dv = thresholds_[i][pos + 1];
        {
          Vec row(p.num_vars, 0.0);
          row[mv] = 1.0;
          row[i] = -1.0;
          p.add_ub(std::move(row), 0.0);  // m <= S
        }
        {
          Vec row(p.num_vars, 0.0);
          row[mv] = 1.0;
          p.add_ub(std::move(row), dv);  // m <= d~
        }
        {
          // chord of min(S, d~) over [lo, hi]: m >= lo + slope (S - lo)
          const double slope = (dv - lo_val[i]) / (hi_val[i] - lo_val[i]);
          Vec row(p.num_vars, 0.0);
          row[i] = slope;
          row[mv] = -1.0;
          p.add_ub(std::move(row), slope * lo_val[i] - lo_val[i]);
        }
      }
    }

    LpSolution sol = solve_with_duals(p);
    if (sol.status == LpStatus::Infeasible) return out;
    if (sol.status != LpStatus::Optimal)
      throw std::runtime_error("solve_offline_milp: node relaxation failed");
    out.feasible = true;
    out.bound = sol.objective + const_obj;
    out.S.assign(sol.primal.begin(), sol.primal.begin() + n_);
    out.exact = nfree == 0;
    return out;
  }

  // smallest admissible segment whose upper threshold covers s_val
  int segment_of(int i, double s_val, int lo, int hi) const {
    for (int k = lo; k < hi; ++k)
      if (s_val <= thresholds_[i][k] + 1e-12) return k;
    return hi;
  }

  const std::vector<std::vector<int>>& order() const { return order_; }
  const std::vector<Vec>& thresholds() const { return thresholds_; }

 private:
  const History& h_;
  const NetworkConfig& cfg_;
  int n_, t_;
  std::vector<std::vector<int>> order_;
  std::vector<Vec> thresholds_;
};

}  // namespace

OfflineSolution solve_offline_milp(const History& h, const NetworkConfig& cfg, const MilpOptions& opts) {
  h.validate();
  if (h.is_extended())
    throw std::invalid_argument("solve_offline_milp: base-model histories only");
  if (h.n() != cfg.n) throw std::invalid_argument("solve_offline_milp: dimension mismatch");
  if (std::fabs(h.initial_state.total - 1.0) > kMassTol)
    throw std::invalid_argument("solve_offline_milp: requires unit total inventory");
  const int n = cfg.n;
  const int t = h.size();

  MilpBnb bnb(h, cfg);

  auto cmp = [](const std::pair<double, long>& a, const std::pair<double, long>& b) {
    return a.first > b.first || (a.first == b.first && a.second > b.second);
  };
  std::priority_queue<std::pair<double, long>, std::vector<std::pair<double, long>>, decltype(cmp)>
      open(cmp);
  std::vector<BnbNode> nodes;

  double best_obj = std::numeric_limits<double>::infinity();
  InventoryVector best_S;
  // absolute gap: the LP/MILP agreement contract is an absolute tolerance
  const auto tol = [&](double) { return opts.gap_tol; };

  auto consider_incumbent = [&](const Vec& S) {
    InventoryVector cand = project_simplex(S, 1.0);
    const double val = offline_objective_at(cand, h, cfg);
    if (val < best_obj - 1e-12) {
      best_obj = val;
      best_S = std::move(cand);
    }
    return val;
  };

  // Each node is solved once, when created; the queue orders them by bound.
  auto make_node = [&](std::vector<int> lo, std::vector<int> hi) -> bool {
    BnbNode node;
    node.lo = std::move(lo);
    node.hi = std::move(hi);
    NodeLp lp = bnb.solve_node(node);
    if (!lp.feasible) return false;
    node.bound = lp.bound;
    node.relaxed_S = lp.S;
    const double val = consider_incumbent(lp.S);
    node.exact = lp.exact || val <= lp.bound + tol(val);
    node.id = static_cast<long>(nodes.size());
    if (!node.exact && node.bound < best_obj - tol(best_obj)) {
      open.push({node.bound, node.id});
      nodes.push_back(std::move(node));
    }
    return true;
  };

  if (!make_node(std::vector<int>(n, 1), std::vector<int>(n, t + 1)) &&
      !std::isfinite(best_obj))
    throw std::runtime_error("solve_offline_milp: infeasible root");

  long processed = 0;
  double lower_bound = open.empty() ? best_obj : open.top().first;

  while (!open.empty()) {
    auto [bound, id] = open.top();
    open.pop();
    lower_bound = bound;
    if (bound >= best_obj - tol(best_obj)) break;  // proven optimal
    if (++processed > opts.node_limit) {
      OfflineSolution inc{best_S, best_obj, OfflineSolverKind::Milp, best_obj - lower_bound};
      throw MilpNodeLimitError(std::move(inc), best_obj - lower_bound);
    }
    const BnbNode node = nodes[id];

    // branch on the location with the widest segment range, splitting at the
    // segment that holds the relaxed S
    int bi = -1, width = 0;
    for (int i = 0; i < n; ++i) {
      const int w = node.hi[i] - node.lo[i];
      if (w > width) {
        width = w;
        bi = i;
      }
    }
    if (bi < 0) continue;  // fully fixed; the bound was exact
    int split = bnb.segment_of(bi, node.relaxed_S[bi], node.lo[bi], node.hi[bi]);
    if (split >= node.hi[bi]) split = node.hi[bi] - 1;

    {
      std::vector<int> hi = node.hi;
      hi[bi] = split;
      make_node(node.lo, std::move(hi));
    }
    {
      std::vector<int> lo = node.lo;
      lo[bi] = split + 1;
      make_node(std::move(lo), node.hi);
    }
  }
  if (open.empty()) lower_bound = best_obj;

  if (!std::isfinite(best_obj)) throw std::runtime_error("solve_offline_milp: no incumbent found");
  OfflineSolution out;
  out.base_stock = best_S;
  out.objective = best_obj;
  out.solver_kind = OfflineSolverKind::Milp;
  out.optimality_gap = std::max(0.0, best_obj - lower_bound);
  return out;
}

OfflineSolution best_base_stock_saa(const DemandSampler& sampler, int m, const NetworkConfig& cfg,
                                    const SaaOptions& opts) {
  if (m < 1) throw std::invalid_argument("best_base_stock_saa: m must be positive");
  History h;
  h.initial_state = InventoryVector{Vec(cfg.n, 1.0 / cfg.n), 1.0};
  for (int s = 0; s < m; ++s) h.samples.push_back(sampler());
  h.validate();

  if (check_cost_condition(cfg, h)) return solve_offline_lp(h, cfg);
  if (static_cast<int>(h.samples.size()) > opts.milp_sample_cap)
    h.samples.resize(opts.milp_sample_cap);
  return solve_offline_milp(h, cfg);
}

OfflineSolution best_base_stock_saa_extended(const ExtendedSampler& sampler, int m,
                                             const NetworkConfig& cfg) {
  if (m < 1) throw std::invalid_argument("best_base_stock_saa_extended: m must be positive");
  History h;
  h.initial_state = InventoryVector{Vec(cfg.n, 1.0 / cfg.n), 1.0};
  for (int s = 0; s < m; ++s) h.extended_samples.push_back(sampler());
  h.validate();
  if (!check_cost_condition(cfg, h))
    std::cerr << "best_base_stock_saa_extended: warning: cost condition fails\n";
  return solve_offline_lp(h, cfg);
}

double evaluate_policy(const InventoryVector& S, const std::vector<DemandSample>& trace,
                       const InventoryVector& x1, const NetworkConfig& cfg) {
  if (trace.empty()) throw std::invalid_argument("evaluate_policy: empty trace");
  InventoryVector x = x1;
  double total = 0.0;
  for (const DemandSample& d : trace) {
    total += modified_cost(x, S, d, cfg);
    x = state_update(S, d);
  }
  return total;
}

double evaluate_policy_extended(const InventoryVector& S,
                                const std::vector<std::vector<SubperiodSample>>& trace,
                                const InventoryVector& x1, const NetworkConfig& cfg) {
  if (trace.empty()) throw std::invalid_argument("evaluate_policy_extended: empty trace");
  InventoryVector x = x1;
  double total = 0.0;
  for (const auto& subs : trace) {
    ExtendedPeriodOutcome outcome = extended_modified_cost(x, S, subs, cfg);
    total += outcome.cost;
    x = outcome.end_inventory;
  }
  return total;
}

}  // namespace soar
