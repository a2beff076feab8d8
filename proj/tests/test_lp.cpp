#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "soar/datagen.hpp"
#include "soar/flow.hpp"
#include "soar/lp.hpp"

using namespace soar;

namespace {

// Independent oracle: enumerate all basic solutions of the standard-form
// system (equalities plus slacked inequalities) and take the best feasible
// vertex. Exponential, so only for tiny instances.
double brute_force_lp(const LpProblem& p) {
  const int nv = p.num_vars;
  const int nub = static_cast<int>(p.ub_rows.size());
  const int m = static_cast<int>(p.eq_rows.size()) + nub;
  const int total = nv + nub;

  // dense standard form
  std::vector<Vec> rows;
  Vec rhs;
  for (size_t r = 0; r < p.eq_rows.size(); ++r) {
    Vec row(total, 0.0);
    std::copy(p.eq_rows[r].begin(), p.eq_rows[r].end(), row.begin());
    rows.push_back(std::move(row));
    rhs.push_back(p.eq_rhs[r]);
  }
  for (int r = 0; r < nub; ++r) {
    Vec row(total, 0.0);
    std::copy(p.ub_rows[r].begin(), p.ub_rows[r].end(), row.begin());
    row[nv + r] = 1.0;
    rows.push_back(std::move(row));
    rhs.push_back(p.ub_rhs[r]);
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> comb(m);
  std::vector<char> chosen(total, 0);

  // iterate over all m-subsets of columns
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == m) {
      // solve the square system by Gaussian elimination
      std::vector<Vec> a(m, Vec(m + 1, 0.0));
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) a[r][c] = rows[r][comb[c]];
        a[r][m] = rhs[r];
      }
      for (int c = 0; c < m; ++c) {
        int piv = -1;
        double best_abs = 1e-9;
        for (int r = c; r < m; ++r)
          if (std::fabs(a[r][c]) > best_abs) {
            best_abs = std::fabs(a[r][c]);
            piv = r;
          }
        if (piv < 0) return;  // singular basis
        std::swap(a[c], a[piv]);
        for (int r = 0; r < m; ++r) {
          if (r == c) continue;
          const double f = a[r][c] / a[c][c];
          if (f == 0.0) continue;
          for (int cc = c; cc <= m; ++cc) a[r][cc] -= f * a[c][cc];
        }
      }
      Vec x(total, 0.0);
      for (int c = 0; c < m; ++c) {
        const double v = a[c][m] / a[c][c];
        if (v < -1e-9) return;  // infeasible vertex
        x[comb[c]] = v;
      }
      double obj = 0.0;
      for (int j = 0; j < nv; ++j) obj += p.objective[j] * x[j];
      best = std::min(best, obj);
      return;
    }
    for (int c = start; c < total; ++c) {
      comb[k] = c;
      rec(c + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

NetworkConfig small_network(int n, double c_scale = 1.0) {
  Mat l(n, n, 1.0), c(n, n, c_scale);
  for (int i = 0; i < n; ++i) c(i, i) = 0.0;
  return make_network_config(n, std::move(l), std::move(c));
}

}  // namespace

TEST_CASE("one-variable problems") {
  {
    LpProblem p(1);
    p.objective[0] = 1.0;
    LpSolution sol = solve_with_duals(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0));
    CHECK(sol.primal[0] == doctest::Approx(0.0));
  }
  {
    LpProblem p(1);
    p.objective[0] = -1.0;
    p.add_ub({1.0}, 1.0);
    LpSolution sol = solve_with_duals(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-1.0));
    CHECK(sol.duals_ub[0] == doctest::Approx(-1.0));
  }
  {
    LpProblem p(1);
    p.objective[0] = -1.0;  // unbounded below
    LpSolution sol = solve_with_duals(p);
    CHECK(sol.status == LpStatus::Unbounded);
  }
  {
    LpProblem p(1);
    p.add_eq({1.0}, -2.0);  // x = -2 with x >= 0
    LpSolution sol = solve_with_duals(p);
    CHECK(sol.status == LpStatus::Infeasible);
  }
}

TEST_CASE("negative rhs and equality duals") {
  // min x1 + x2  s.t.  x1 + x2 = 3, -x1 <= -1  (i.e. x1 >= 1)
  LpProblem p(2);
  p.objective = {1.0, 2.0};
  p.add_eq({1.0, 1.0}, 3.0);
  p.add_ub({-1.0, 0.0}, -1.0);
  LpSolution sol = solve_with_duals(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.primal[0] == doctest::Approx(3.0));
  CHECK(sol.primal[1] == doctest::Approx(0.0));
  CHECK(sol.objective == doctest::Approx(3.0));
  // strong duality: y_eq * 3 + y_ub * (-1) = 3
  CHECK(sol.duals_eq[0] * 3.0 - sol.duals_ub[0] == doctest::Approx(3.0));
  CHECK(sol.duals_ub[0] <= 1e-9);
}

TEST_CASE("random 5x5 LPs match vertex enumeration") {
  Rng rng(12345);
  int solved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    LpProblem p(5);
    for (int j = 0; j < 5; ++j) p.objective[j] = rng.uniform(-1.0, 1.0);
    // box to keep it bounded, plus a couple of random rows
    for (int j = 0; j < 5; ++j) {
      Vec row(5, 0.0);
      row[j] = 1.0;
      p.add_ub(std::move(row), rng.uniform(0.5, 2.0));
    }
    for (int r = 0; r < 3; ++r) {
      Vec row(5);
      for (double& v : row) v = rng.uniform(-0.5, 1.0);
      p.add_ub(std::move(row), rng.uniform(0.2, 2.0));
    }
    LpSolution sol = solve_with_duals(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    const double oracle = brute_force_lp(p);
    CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-6));
    // duality and complementary slackness
    double dual_obj = 0.0;
    for (size_t r = 0; r < p.ub_rows.size(); ++r) {
      dual_obj += sol.duals_ub[r] * p.ub_rhs[r];
      CHECK(sol.duals_ub[r] <= 1e-9);
      const double slack = p.ub_rhs[r] - dot(p.ub_rows[r], sol.primal);
      CHECK(std::fabs(sol.duals_ub[r] * slack) < 1e-6);
    }
    CHECK(dual_obj == doctest::Approx(sol.objective).epsilon(1e-6));
    ++solved;
  }
  CHECK(solved == 40);
}

TEST_CASE("random equality-constrained LPs agree with enumeration") {
  Rng rng(777);
  for (int trial = 0; trial < 25; ++trial) {
    LpProblem p(4);
    for (int j = 0; j < 4; ++j) p.objective[j] = rng.uniform(-1.0, 1.0);
    Vec row(4);
    for (double& v : row) v = rng.uniform(0.2, 1.0);
    p.add_eq(std::move(row), 1.0);
    for (int j = 0; j < 4; ++j) {
      Vec box(4, 0.0);
      box[j] = 1.0;
      p.add_ub(std::move(box), rng.uniform(0.4, 1.5));
    }
    LpSolution sol = solve_with_duals(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(brute_force_lp(p)).epsilon(1e-6));
  }
}

TEST_CASE("min_cost_flow basics") {
  NetworkConfig cfg = small_network(2, 2.0);

  SUBCASE("zero delta, zero flow") {
    FlowResult r = min_cost_flow({0.0, 0.0}, cfg);
    CHECK(r.value == doctest::Approx(0.0));
    for (double f : r.flows.a) CHECK(f == doctest::Approx(0.0));
  }
  SUBCASE("single forced arc") {
    FlowResult r = min_cost_flow({-0.3, 0.3}, cfg);
    CHECK(r.value == doctest::Approx(0.6));
    CHECK(r.flows(0, 1) == doctest::Approx(0.3));
  }
  SUBCASE("unbalanced delta rejected") {
    CHECK_THROWS_AS(min_cost_flow({0.1, 0.0}, cfg), std::invalid_argument);
  }
}

TEST_CASE("min_cost_flow relay routing") {
  // cheap chain 1 -> 2 -> 3 beats the direct expensive arc
  Mat l(3, 3, 1.0), c(3, 3, 10.0);
  c(0, 1) = 1.0;
  c(1, 2) = 1.0;
  c(0, 2) = 5.0;
  NetworkConfig cfg = make_network_config(3, std::move(l), std::move(c));
  FlowResult r = min_cost_flow({-0.2, 0.0, 0.2}, cfg);
  CHECK(r.value == doctest::Approx(0.4));
  // node balance
  for (int j = 0; j < 3; ++j) {
    double inflow = 0.0, outflow = 0.0;
    for (int i = 0; i < 3; ++i) inflow += r.flows(i, j);
    for (int k = 0; k < 3; ++k) outflow += r.flows(j, k);
    const double delta = (j == 0 ? -0.2 : (j == 2 ? 0.2 : 0.0));
    CHECK(inflow - outflow == doctest::Approx(delta).epsilon(1e-8));
  }
}

TEST_CASE("min_cost_flow property suite") {
  Rng rng(2024);
  for (int n : {3, 5, 10}) {
    Mat l(n, n, 1.0), c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = i == j ? 0.0 : rng.uniform(0.5, 3.0);
    NetworkConfig cfg = make_network_config(n, std::move(l), std::move(c));
    const double cmax = cfg.max_repo_cost();
    for (int trial = 0; trial < 30; ++trial) {
      Vec a(n), b(n);
      double sa = 0.0, sb = 0.0;
      for (int i = 0; i < n; ++i) {
        a[i] = rng.uniform(-1.0, 1.0);
        b[i] = rng.uniform(-1.0, 1.0);
        sa += a[i];
        sb += b[i];
      }
      for (int i = 0; i < n; ++i) {
        a[i] -= sa / n;
        b[i] -= sb / n;
      }
      const double va = repositioning_cost(a, cfg);
      const double vb = repositioning_cost(b, cfg);
      Vec ab(n);
      for (int i = 0; i < n; ++i) ab[i] = a[i] + b[i];
      const double vab = repositioning_cost(ab, cfg);
      CHECK(vab <= va + vb + 1e-9);                     // subadditivity
      CHECK(va <= 2.0 * cmax * l1_norm(a) + 1e-9);      // L1 bound
      CHECK(va >= -1e-12);
    }
  }
}

TEST_CASE("project_simplex") {
  SUBCASE("idempotent on simplex points") {
    const Vec v = {0.2, 0.3, 0.5};
    InventoryVector w = project_simplex(v, 1.0);
    for (int i = 0; i < 3; ++i) CHECK(w.values[i] == doctest::Approx(v[i]).epsilon(1e-12));
  }
  SUBCASE("symmetric point") {
    InventoryVector w = project_simplex({0.8, 0.8}, 1.0);
    CHECK(w.values[0] == doctest::Approx(0.5));
    CHECK(w.values[1] == doctest::Approx(0.5));
  }
  SUBCASE("known asymmetric projection") {
    InventoryVector w = project_simplex({1.0, 0.2}, 1.0);
    CHECK(w.values[0] == doctest::Approx(0.9));
    CHECK(w.values[1] == doctest::Approx(0.1));
  }
  SUBCASE("grid oracle on the 2-simplex") {
    // brute-force quadratic minimization over a fine grid
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
      Vec v = {rng.uniform(-1.0, 2.0), rng.uniform(-1.0, 2.0)};
      InventoryVector w = project_simplex(v, 1.0);
      double best = std::numeric_limits<double>::infinity();
      Vec best_pt(2);
      for (int g = 0; g <= 100000; ++g) {
        const double a = g * 1e-5;
        const double d = (a - v[0]) * (a - v[0]) + (1.0 - a - v[1]) * (1.0 - a - v[1]);
        if (d < best) {
          best = d;
          best_pt = {a, 1.0 - a};
        }
      }
      CHECK(std::fabs(w.values[0] - best_pt[0]) < 1e-4);
    }
  }
  SUBCASE("variational inequality") {
    Rng rng(4242);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + trial % 4;
      Vec v(n);
      for (double& x : v) x = rng.uniform(-2.0, 2.0);
      InventoryVector pi = project_simplex(v, 1.0);
      CHECK(std::fabs(vec_sum(pi.values) - 1.0) < 1e-12);
      for (int s = 0; s < 20; ++s) {
        // random simplex point w
        Vec w(n);
        double tot = 0.0;
        for (double& x : w) {
          x = -std::log(1.0 - rng.uniform());
          tot += x;
        }
        for (double& x : w) x /= tot;
        double ip = 0.0;
        for (int i = 0; i < n; ++i) ip += (v[i] - pi.values[i]) * (w[i] - pi.values[i]);
        CHECK(ip <= 1e-8);
      }
    }
  }
}
