// Internal builders for the per-period surrogate LPs (base and extended).
// Shared between the offline solvers and the online steps; not installed.
#pragma once

#include <vector>

#include "soar/lp.hpp"
#include "soar/types.hpp"

namespace soar::detail {

// sum_j l_ij P_ij per location i: the value of one fulfilled unit.
inline Vec lost_sales_row_value(const Mat& P, const NetworkConfig& cfg) {
  Vec v(cfg.n, 0.0);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.n; ++j) v[i] += cfg.lost_sales(i, j) * P(i, j);
  return v;
}

// Residual fractions r_{k,i} = 1 - sum_j P_k(i,j) and their running
// products, used to expand outstanding inventory in terms of fulfillment.
struct ResidualProducts {
  int H = 0, n = 0;
  std::vector<Vec> r;

  explicit ResidualProducts(const std::vector<SubperiodSample>& subs) {
    H = static_cast<int>(subs.size());
    n = subs.front().n();
    for (const SubperiodSample& s : subs) {
      Vec rk = s.od_matrix.row_sums();
      for (double& x : rk) x = 1.0 - x;
      r.push_back(std::move(rk));
    }
  }

  // product over u in [o, m]; empty when m < o
  double prod(int o, int m, int i) const {
    double p = 1.0;
    for (int u = o; u <= m; ++u) p *= r[u][i];
    return p;
  }
};

// Extended surrogate LP in (xi, w) with the outstanding-inventory recursion
// substituted into the flow balance. Upper-bound rows: first the fulfillment
// caps w_k <= cap_k (censored or true demand), then, when requested, the
// stock rows w_k <= x_k(y, w) whose duals sum to a subgradient in y.
struct ExtendedLpLayout {
  LpProblem lp{1};
  int n = 0, H = 0;
  int w_var(int k, int i) const { return n * n + k * n + i; }
  int cap_row(int k, int i) const { return k * n + i; }            // index among ub rows
  int ycap_row(int k, int i) const { return H * n + k * n + i; }   // index among ub rows
};

inline ExtendedLpLayout build_extended_lp(const Vec& y, const std::vector<SubperiodSample>& subs,
                                          const std::vector<Vec>& caps, bool with_y_rows,
                                          const NetworkConfig& cfg) {
  const int n = cfg.n;
  const int H = static_cast<int>(subs.size());
  ResidualProducts res(subs);

  ExtendedLpLayout lay;
  lay.n = n;
  lay.H = H;
  lay.lp = LpProblem(n * n + H * n);
  LpProblem& p = lay.lp;

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.objective[i * n + j] = cfg.repo_cost(i, j);
  for (int k = 0; k < H; ++k) {
    const Vec lp_row = lost_sales_row_value(subs[k].od_matrix, cfg);
    for (int i = 0; i < n; ++i) p.objective[lay.w_var(k, i)] = -lp_row[i];
  }

  for (int j = 0; j < n; ++j) {
    Vec row(p.num_vars, 0.0);
    for (int i = 0; i < n; ++i) row[i * n + j] += 1.0;
    for (int k = 0; k < n; ++k) row[j * n + k] -= 1.0;
    for (int o = 0; o < H; ++o) {
      for (int i = 0; i < n; ++i) {
        double coef = (i == j) ? -1.0 : 0.0;
        coef += subs[o].od_matrix(i, j);
        for (int k = o + 1; k < H; ++k) coef += subs[k].od_matrix(i, j) * res.prod(o, k - 1, i);
        if (coef != 0.0) row[lay.w_var(o, i)] = coef;
      }
    }
    p.add_eq(std::move(row), 0.0);
  }

  for (int k = 0; k < H; ++k) {
    for (int i = 0; i < n; ++i) {
      Vec row(p.num_vars, 0.0);
      row[lay.w_var(k, i)] = 1.0;
      p.add_ub(std::move(row), caps[k][i]);
    }
  }

  if (with_y_rows) {
    // w_{k,i} <= on-hand entering subperiod k, expanded in y and the earlier
    // fulfillments; the coefficient of y_i is one in every row
    for (int k = 0; k < H; ++k) {
      for (int i = 0; i < n; ++i) {
        Vec row(p.num_vars, 0.0);
        row[lay.w_var(k, i)] = 1.0;
        for (int o = 0; o < k; ++o) {
          for (int j = 0; j < n; ++j) {
            double coef = (j == i) ? 1.0 : 0.0;
            coef -= subs[o].od_matrix(j, i);
            for (int h = o + 1; h < k; ++h) coef -= subs[h].od_matrix(j, i) * res.prod(o, h - 1, j);
            if (coef != 0.0) row[lay.w_var(o, j)] += coef;
          }
        }
        p.add_ub(std::move(row), y[i]);
      }
    }
  }
  return lay;
}

}  // namespace soar::detail
