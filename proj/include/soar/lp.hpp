// Dense two-phase primal simplex with dual extraction.
//
// Problems are stated as  min c.x  subject to  A_eq x = b_eq,  A_ub x <= b_ub,
// x >= 0. Duals follow the minimization convention: duals of <= rows are
// nonpositive at optimality, and the dual objective
// duals_eq . b_eq + duals_ub . b_ub equals the primal objective.
#pragma once

#include <vector>

#include "soar/linalg.hpp"

namespace soar {

enum class LpStatus { Optimal, Infeasible, Unbounded, SolverFailure };

struct LpProblem {
  int num_vars = 0;
  Vec objective;
  std::vector<Vec> eq_rows;
  Vec eq_rhs;
  std::vector<Vec> ub_rows;
  Vec ub_rhs;

  explicit LpProblem(int nvars = 0) : num_vars(nvars), objective(nvars, 0.0) {}

  void add_eq(Vec row, double rhs) {
    eq_rows.push_back(std::move(row));
    eq_rhs.push_back(rhs);
  }
  void add_ub(Vec row, double rhs) {
    ub_rows.push_back(std::move(row));
    ub_rhs.push_back(rhs);
  }
  void validate() const;
};

struct LpSolution {
  LpStatus status = LpStatus::SolverFailure;
  double objective = 0.0;
  Vec primal;
  Vec duals_eq;
  Vec duals_ub;
};

// Feasibility tolerance used internally and in the post-solve checks.
constexpr double kLpFeasTol = 1e-8;
// Allowed slack on the strong-duality identity of an Optimal solve.
constexpr double kLpDualityTol = 1e-6;

LpSolution solve_with_duals(const LpProblem& p);

}  // namespace soar
