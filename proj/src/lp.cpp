#include "soar/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace soar {

void LpProblem::validate() const {
  if (num_vars <= 0) throw std::invalid_argument("LpProblem: no variables");
  if (static_cast<int>(objective.size()) != num_vars)
    throw std::invalid_argument("LpProblem: objective size mismatch");
  if (eq_rows.size() != eq_rhs.size() || ub_rows.size() != ub_rhs.size())
    throw std::invalid_argument("LpProblem: rhs size mismatch");
  auto check_finite = [](const Vec& v) {
    for (double x : v)
      if (!std::isfinite(x)) throw std::invalid_argument("LpProblem: non-finite coefficient");
  };
  check_finite(objective);
  for (const Vec& r : eq_rows) {
    if (static_cast<int>(r.size()) != num_vars) throw std::invalid_argument("LpProblem: eq row size");
    check_finite(r);
  }
  for (const Vec& r : ub_rows) {
    if (static_cast<int>(r.size()) != num_vars) throw std::invalid_argument("LpProblem: ub row size");
    check_finite(r);
  }
  check_finite(eq_rhs);
  check_finite(ub_rhs);
}

namespace {

constexpr double kPivotTol = 1e-9;

// Tableau-based two-phase simplex. Column layout:
//   [0, nv)                structural variables
//   [nv, nv+nub)           slacks, one per <= row
//   [nv+nub, nv+nub+nart)  artificials
// Rows are ordered eq rows first, then ub rows. The rhs is stored in the
// last column and the (phase-dependent) objective in the last row.
class SimplexTableau {
 public:
  explicit SimplexTableau(const LpProblem& p)
      : neq_(static_cast<int>(p.eq_rows.size())),
        nub_(static_cast<int>(p.ub_rows.size())),
        nv_(p.num_vars),
        m_(neq_ + nub_) {
    row_sign_.assign(m_, 1.0);
    basis_.assign(m_, -1);

    // Artificials: every eq row gets one; ub rows get one only when the rhs
    // is negative (the flipped slack cannot start basic).
    art_of_row_.assign(m_, -1);
    int nart = 0;
    for (int r = 0; r < m_; ++r) {
      const bool is_eq = r < neq_;
      const double rhs = is_eq ? p.eq_rhs[r] : p.ub_rhs[r - neq_];
      if (is_eq || rhs < 0.0) art_of_row_[r] = nart++;
    }
    nart_ = nart;
    ncols_ = nv_ + nub_ + nart_;
    stride_ = ncols_ + 1;
    dead_row_.assign(m_, 0);
    t_.assign(static_cast<size_t>(m_ + 1) * stride_, 0.0);

    for (int r = 0; r < m_; ++r) {
      const bool is_eq = r < neq_;
      const Vec& row = is_eq ? p.eq_rows[r] : p.ub_rows[r - neq_];
      double rhs = is_eq ? p.eq_rhs[r] : p.ub_rhs[r - neq_];
      double sign = 1.0;
      if (rhs < 0.0) {
        sign = -1.0;
        rhs = -rhs;
      }
      row_sign_[r] = sign;
      double* tr = row_ptr(r);
      for (int j = 0; j < nv_; ++j) tr[j] = sign * row[j];
      if (!is_eq) tr[nv_ + (r - neq_)] = sign;  // slack
      if (art_of_row_[r] >= 0) {
        tr[nv_ + nub_ + art_of_row_[r]] = 1.0;
        basis_[r] = nv_ + nub_ + art_of_row_[r];
      } else {
        basis_[r] = nv_ + (r - neq_);
      }
      tr[ncols_] = rhs;
    }
  }

  // Phase 1: minimize the sum of artificials.
  bool phase1() {
    if (nart_ == 0) return true;
    double* obj = row_ptr(m_);
    std::fill(obj, obj + stride_, 0.0);
    for (int j = nv_ + nub_; j < ncols_; ++j) obj[j] = 1.0;
    // Price out the basic artificials.
    for (int r = 0; r < m_; ++r)
      if (basis_[r] >= nv_ + nub_) subtract_row(m_, r, 1.0);
    allow_artificials_ = true;
    if (!iterate()) return false;
    if (unbounded_) {  // phase 1 is bounded below by zero; this is numerical trouble
      failed_ = true;
      return false;
    }
    if (row_ptr(m_)[ncols_] < -kLpFeasTol) {
      infeasible_ = true;
      return true;
    }
    drive_out_artificials();
    return true;
  }

  // Phase 2: minimize the real objective with artificials pinned out.
  bool phase2(const Vec& c) {
    double* obj = row_ptr(m_);
    std::fill(obj, obj + stride_, 0.0);
    for (int j = 0; j < nv_; ++j) obj[j] = c[j];
    for (int r = 0; r < m_; ++r) {
      if (dead_row_[r]) continue;
      const int b = basis_[r];
      if (b < nv_ && c[b] != 0.0) subtract_row(m_, r, c[b]);
    }
    allow_artificials_ = false;
    return iterate();
  }

  bool infeasible() const { return infeasible_; }
  bool unbounded() const { return unbounded_; }
  bool failed() const { return failed_; }

  Vec primal() const {
    Vec x(nv_, 0.0);
    for (int r = 0; r < m_; ++r)
      if (!dead_row_[r] && basis_[r] < nv_) x[basis_[r]] = row_const(r)[ncols_];
    return x;
  }

  // Duals recovered from final phase-2 reduced costs. For a <= row the dual
  // equals minus the reduced cost of its slack; for an eq row, minus the
  // reduced cost of its artificial times the row normalization sign.
  void extract_duals(Vec& duals_eq, Vec& duals_ub) const {
    const double* obj = row_const(m_);
    duals_eq.assign(neq_, 0.0);
    duals_ub.assign(nub_, 0.0);
    for (int r = 0; r < m_; ++r) {
      if (r < neq_) {
        duals_eq[r] = -row_sign_[r] * obj[nv_ + nub_ + art_of_row_[r]];
      } else {
        duals_ub[r - neq_] = -obj[nv_ + (r - neq_)];
      }
    }
  }

 private:
  double* row_ptr(int r) { return t_.data() + static_cast<size_t>(r) * stride_; }
  const double* row_const(int r) const { return t_.data() + static_cast<size_t>(r) * stride_; }

  void subtract_row(int dst, int src, double factor) {
    if (factor == 0.0) return;
    double* d = row_ptr(dst);
    const double* s = row_const(src);
    for (int j = 0; j <= ncols_; ++j) d[j] -= factor * s[j];
  }

  void pivot(int prow, int pcol) {
    double* pr = row_ptr(prow);
    const double pv = pr[pcol];
    for (int j = 0; j <= ncols_; ++j) pr[j] /= pv;
    pr[pcol] = 1.0;
    for (int r = 0; r <= m_; ++r) {
      if (r == prow) continue;
      double* tr = row_ptr(r);
      const double f = tr[pcol];
      if (f == 0.0) continue;
      for (int j = 0; j <= ncols_; ++j) tr[j] -= f * pr[j];
      tr[pcol] = 0.0;
    }
    basis_[prow] = pcol;
  }

  bool column_allowed(int j) const {
    if (j >= nv_ + nub_) return allow_artificials_;
    return true;
  }

  // Dantzig pricing with lowest-index tie-breaking; falls back to Bland's
  // rule after a run of degenerate pivots so cycling cannot occur.
  int choose_entering(bool bland) const {
    const double* obj = row_const(m_);
    int best = -1;
    if (bland) {
      for (int j = 0; j < ncols_; ++j)
        if (column_allowed(j) && obj[j] < -kPivotTol) return j;
      return -1;
    }
    double best_val = -kPivotTol;
    for (int j = 0; j < ncols_; ++j) {
      if (!column_allowed(j)) continue;
      if (obj[j] < best_val) {
        best_val = obj[j];
        best = j;
      }
    }
    return best;
  }

  int choose_leaving(int col, bool bland) const {
    int best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m_; ++r) {
      if (dead_row_[r]) continue;
      const double a = row_const(r)[col];
      if (a <= kPivotTol) continue;
      const double ratio = row_const(r)[ncols_] / a;
      if (ratio < best_ratio - 1e-12) {
        best_ratio = ratio;
        best = r;
      } else if (best >= 0 && ratio <= best_ratio + 1e-12) {
        if (bland ? (basis_[r] < basis_[best]) : (basis_[r] < basis_[best])) best = r;
      }
    }
    return best;
  }

  bool iterate() {
    const long max_iters = 2000L + 60L * (static_cast<long>(m_) + ncols_);
    long degenerate_streak = 0;
    bool bland = false;
    double last_obj = row_const(m_)[ncols_];
    for (long it = 0; it < max_iters; ++it) {
      const int col = choose_entering(bland);
      if (col < 0) return true;
      const int row = choose_leaving(col, bland);
      if (row < 0) {
        unbounded_ = true;
        return true;
      }
      pivot(row, col);
      // The stored rhs is the negated objective, nondecreasing under
      // minimization; a stall means a degenerate pivot.
      const double obj = row_const(m_)[ncols_];
      if (obj <= last_obj + 1e-12) {
        if (++degenerate_streak > 2L * (m_ + 8)) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }
      last_obj = obj;
    }
    failed_ = true;
    return false;
  }

  // After phase 1, pivot basic artificials out where possible; rows whose
  // non-artificial entries are all zero are redundant and marked dead.
  void drive_out_artificials() {
    dead_row_.assign(m_, 0);
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < nv_ + nub_) continue;
      int pcol = -1;
      const double* tr = row_const(r);
      for (int j = 0; j < nv_ + nub_; ++j) {
        if (std::fabs(tr[j]) > 1e-7) {
          pcol = j;
          break;
        }
      }
      if (pcol >= 0)
        pivot(r, pcol);
      else
        dead_row_[r] = 1;
    }
  }

  int neq_, nub_, nv_, m_;
  int nart_ = 0, ncols_ = 0, stride_ = 0;
  Vec t_;
  std::vector<int> basis_;
  std::vector<int> art_of_row_;
  std::vector<char> dead_row_;
  Vec row_sign_;
  bool allow_artificials_ = false;
  bool infeasible_ = false;
  bool unbounded_ = false;
  bool failed_ = false;
};

// Post-solve verification: primal feasibility plus the strong-duality
// identity. A solve that violates either is reported as a failure rather
// than silently returned.
bool verify_optimal(const LpProblem& p, LpSolution& sol) {
  const double scale = std::max(1.0, std::fabs(sol.objective));
  for (size_t r = 0; r < p.eq_rows.size(); ++r) {
    if (std::fabs(dot(p.eq_rows[r], sol.primal) - p.eq_rhs[r]) > kLpFeasTol * scale * 10) return false;
  }
  for (size_t r = 0; r < p.ub_rows.size(); ++r) {
    if (dot(p.ub_rows[r], sol.primal) - p.ub_rhs[r] > kLpFeasTol * scale * 10) return false;
  }
  for (double x : sol.primal)
    if (x < -kLpFeasTol) return false;
  double dual_obj = 0.0;
  for (size_t r = 0; r < p.eq_rows.size(); ++r) dual_obj += sol.duals_eq[r] * p.eq_rhs[r];
  for (size_t r = 0; r < p.ub_rows.size(); ++r) dual_obj += sol.duals_ub[r] * p.ub_rhs[r];
  return std::fabs(dual_obj - sol.objective) <= kLpDualityTol * scale;
}

}  // namespace

LpSolution solve_with_duals(const LpProblem& p) {
  p.validate();
  LpSolution sol;

  SimplexTableau tab(p);
  if (!tab.phase1()) {
    sol.status = LpStatus::SolverFailure;
    return sol;
  }
  if (tab.infeasible()) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  if (!tab.phase2(p.objective)) {
    sol.status = LpStatus::SolverFailure;
    return sol;
  }
  if (tab.unbounded()) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  sol.primal = tab.primal();
  sol.objective = dot(p.objective, sol.primal);
  tab.extract_duals(sol.duals_eq, sol.duals_ub);
  sol.status = verify_optimal(p, sol) ? LpStatus::Optimal : LpStatus::SolverFailure;
  return sol;
}

}  // namespace soar
