#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <iostream>

#include "soar/datagen.hpp"
#include "soar/dynamics.hpp"
#include "soar/flow.hpp"
#include "soar/offline.hpp"

using namespace soar;

namespace {

Mat stochastic(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  Mat m(n, n);
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

NetworkConfig uniform_network(int n, double l_val, double c_val) {
  Mat l(n, n, l_val), c(n, n, c_val);
  for (int i = 0; i < n; ++i) c(i, i) = 0.0;
  return make_network_config(n, std::move(l), std::move(c));
}

Mat random_stochastic(int n, Rng& rng) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      m(i, j) = rng.uniform(0.01, 1.0);
      s += m(i, j);
    }
    for (int j = 0; j < n; ++j) m(i, j) /= s;
  }
  return m;
}

History random_history(int n, int t, Rng& rng, double demand_hi = 1.0) {
  History h;
  h.initial_state = InventoryVector{Vec(n, 1.0 / n), 1.0};
  for (int s = 0; s < t; ++s) {
    Vec d(n);
    for (double& v : d) v = rng.uniform(0.05, demand_hi);
    h.samples.push_back(DemandSample{std::move(d), random_stochastic(n, rng)});
  }
  return h;
}

// exhaustive search over the 1-simplex, the independent oracle for n = 2
double grid_min_objective(const History& h, const NetworkConfig& cfg, double step,
                          Vec* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (double a = 0.0; a <= 1.0 + 1e-12; a += step) {
    const InventoryVector S{{a, 1.0 - a}, 1.0};
    const double v = offline_objective_at(S, h, cfg);
    if (v < best) {
      best = v;
      if (argmin) *argmin = S.values;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("check_cost_condition") {
  Rng rng(3);
  SUBCASE("uniform costs, easy dominance") {
    NetworkConfig cfg = uniform_network(3, 1.0, 0.5);
    CHECK(check_cost_condition(cfg, {random_stochastic(3, rng)}));
  }
  SUBCASE("uniform costs, repositioning too expensive") {
    NetworkConfig cfg = uniform_network(3, 1.0, 2.0);
    CHECK_FALSE(check_cost_condition(cfg, {random_stochastic(3, rng)}));
  }
}

TEST_CASE("solve_offline_lp: single-sample concentration") {
  // zero repositioning cost, uniform value: push stock where demand is
  NetworkConfig cfg = uniform_network(2, 1.0, 0.0);
  History h;
  h.initial_state = InventoryVector{{0.5, 0.5}, 1.0};
  h.samples.push_back(DemandSample{{0.7, 0.2}, stochastic({{0.5, 0.5}, {0.5, 0.5}})});

  OfflineSolution sol = solve_offline_lp(h, cfg);
  CHECK(sol.solver_kind == OfflineSolverKind::Lp);
  CHECK(sol.objective == doctest::Approx(-0.9).epsilon(1e-9));
  CHECK(sol.base_stock.values[0] >= 0.7 - 1e-9);
  CHECK(sol.base_stock.values[0] <= 0.8 + 1e-9);
  CHECK(grid_min_objective(h, cfg, 1e-3) == doctest::Approx(-0.9).epsilon(1e-6));
}

TEST_CASE("solve_offline_lp: zero demand") {
  NetworkConfig cfg = uniform_network(2, 1.0, 0.5);
  History h;
  h.initial_state = InventoryVector{{0.5, 0.5}, 1.0};
  h.samples.push_back(DemandSample{{0.0, 0.0}, stochastic({{0.5, 0.5}, {0.5, 0.5}})});
  OfflineSolution sol = solve_offline_lp(h, cfg);
  CHECK(sol.objective == doctest::Approx(0.0));
  sol.base_stock.validate();
}

TEST_CASE("offline LP matches MILP under the cost condition") {
  Rng rng(101);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 3;
    const int t = 5;
    Mat l(n, n), c(n, n);
    for (double& v : l.a) v = rng.uniform(1.0, 2.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = i == j ? 0.0 : rng.uniform(0.5, 1.0);
    NetworkConfig cfg = make_network_config(n, std::move(l), std::move(c));
    History h = random_history(n, t, rng);
    REQUIRE(check_cost_condition(cfg, h));

    OfflineSolution lp = solve_offline_lp(h, cfg);
    OfflineSolution milp = solve_offline_milp(h, cfg);
    CHECK(lp.objective == doctest::Approx(milp.objective).epsilon(2e-6));
  }
}

TEST_CASE("milp encoding semantics") {
  // two samples, location demands 0.6 then 0.2 (sorted order flips them)
  NetworkConfig cfg = uniform_network(2, 1.0, 0.5);
  History h;
  h.initial_state = InventoryVector{{0.5, 0.5}, 1.0};
  const Mat P = stochastic({{0.5, 0.5}, {0.5, 0.5}});
  h.samples.push_back(DemandSample{{0.6, 0.3}, P});
  h.samples.push_back(DemandSample{{0.2, 0.3}, P});

  MilpEncoding enc = build_offline_milp_encoding(h, cfg);
  REQUIRE(enc.t == 2);
  // sorted order at location 0: sample 1 (0.2) before sample 0 (0.6)
  CHECK(enc.sort_order[0][0] == 1);
  CHECK(enc.sort_order[0][1] == 0);

  auto solve_with_fixed_z = [&](int k0, int k1) {
    LpProblem p = enc.lp;
    for (int k = 0; k <= enc.t; ++k) {
      {
        Vec row(p.num_vars, 0.0);
        row[enc.z_var(k, 0)] = 1.0;
        p.add_eq(std::move(row), k == k0 ? 1.0 : 0.0);
      }
      {
        Vec row(p.num_vars, 0.0);
        row[enc.z_var(k, 1)] = 1.0;
        p.add_eq(std::move(row), k == k1 ? 1.0 : 0.0);
      }
    }
    return solve_with_duals(p);
  };

  SUBCASE("segment z_1 = 1 pins m to S below the smallest demand") {
    // location 0 in its first segment: S_0 <= 0.2 and m = (S_0, S_0)
    LpSolution sol = solve_with_fixed_z(0, 2);
    REQUIRE(sol.status == LpStatus::Optimal);
    const double s0 = sol.primal[enc.s_var(0)];
    CHECK(s0 <= 0.2 + 1e-9);
    CHECK(sol.primal[enc.m_var(0, 0)] == doctest::Approx(s0).epsilon(1e-7));
    CHECK(sol.primal[enc.m_var(1, 0)] == doctest::Approx(s0).epsilon(1e-7));
  }
  SUBCASE("segment z_3 = 1 pins m to the demands above the largest") {
    LpSolution sol = solve_with_fixed_z(2, 2);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.primal[enc.s_var(0)] >= 0.6 - 1e-9);
    CHECK(sol.primal[enc.m_var(0, 0)] == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(sol.primal[enc.m_var(1, 0)] == doctest::Approx(0.2).epsilon(1e-7));
  }
}

TEST_CASE("milp matches the grid oracle on the 1-simplex") {
  Rng rng(202);
  for (int trial = 0; trial < 6; ++trial) {
    // alternate between cost regimes; the MILP must be exact in both
    const bool expensive = trial % 2 == 1;
    Mat l(2, 2), c(2, 2);
    for (double& v : l.a) v = rng.uniform(1.0, 2.0);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        c(i, j) = i == j ? 0.0 : rng.uniform(expensive ? 5.0 : 0.5, expensive ? 10.0 : 1.0);
    NetworkConfig cfg = make_network_config(2, std::move(l), std::move(c));
    History h = random_history(2, 3, rng);

    OfflineSolution milp = solve_offline_milp(h, cfg);
    Vec grid_arg(2);
    const double grid_best = grid_min_objective(h, cfg, 1e-3, &grid_arg);
    CHECK(milp.objective <= grid_best + 1e-9);
    CHECK(milp.objective >= grid_best - 2e-3);  // grid resolution slack
  }
}

TEST_CASE("milp beats the LP solution when the cost condition fails") {
  Rng rng(303);
  for (int trial = 0; trial < 4; ++trial) {
    NetworkConfig cfg = uniform_network(3, 1.0, 8.0);  // repositioning dominates
    History h = random_history(3, 4, rng);
    REQUIRE_FALSE(check_cost_condition(cfg, h));

    OfflineSolution milp = solve_offline_milp(h, cfg);
    OfflineSolution lp = solve_offline_lp(h, cfg);
    // the LP's argmin, forced to actually fulfill min(S, d), can only do worse
    const double lp_as_policy = offline_objective_at(lp.base_stock, h, cfg);
    CHECK(milp.objective <= lp_as_policy + 1e-9);
    const double milp_forced = offline_objective_at(milp.base_stock, h, cfg);
    CHECK(milp_forced == doctest::Approx(milp.objective).epsilon(1e-9));
  }
}

TEST_CASE("cutting-plane path agrees with the grid oracle") {
  // large sample count forces the decomposition path; n = 2 keeps the
  // independent grid search cheap
  Rng rng(404);
  NetworkConfig cfg = uniform_network(2, 1.5, 0.7);
  History h = random_history(2, 400, rng);
  OfflineSolution sol = solve_offline_lp(h, cfg);
  Vec grid_arg(2);
  const double grid_best = grid_min_objective(h, cfg, 1e-3, &grid_arg);
  CHECK(sol.objective == doctest::Approx(grid_best).epsilon(1e-5));
  CHECK(std::fabs(sol.base_stock.values[0] - grid_arg[0]) < 5e-3);
}

TEST_CASE("evaluate_policy") {
  NetworkConfig cfg = uniform_network(2, 1.0, 2.0);
  const Mat P = stochastic({{0.3, 0.7}, {0.6, 0.4}});
  InventoryVector S{{0.6, 0.4}, 1.0};

  SUBCASE("zero demand from the policy point costs nothing") {
    std::vector<DemandSample> trace = {DemandSample{{0.0, 0.0}, P}};
    CHECK(evaluate_policy(S, trace, S, cfg) == doctest::Approx(0.0));
  }
  SUBCASE("single period equals modified_cost") {
    std::vector<DemandSample> trace = {DemandSample{{0.5, 0.1}, P}};
    InventoryVector x1{{0.5, 0.5}, 1.0};
    CHECK(evaluate_policy(S, trace, x1, cfg) ==
          doctest::Approx(modified_cost(x1, S, trace[0], cfg)));
  }
  SUBCASE("three-period hand simulation") {
    std::vector<DemandSample> trace = {
        DemandSample{{0.5, 0.1}, P},
        DemandSample{{0.2, 0.6}, P},
        DemandSample{{0.4, 0.4}, P},
    };
    InventoryVector x1{{0.5, 0.5}, 1.0};
    double want = 0.0;
    InventoryVector x = x1;
    for (const DemandSample& d : trace) {
      want += modified_cost(x, S, d, cfg);
      x = state_update(S, d);
    }
    CHECK(evaluate_policy(S, trace, x1, cfg) == doctest::Approx(want));
  }
  SUBCASE("additive over concatenation") {
    Rng rng(50);
    std::vector<DemandSample> part1, part2;
    for (int t = 0; t < 4; ++t)
      part1.push_back(DemandSample{{rng.uniform(), rng.uniform()}, random_stochastic(2, rng)});
    for (int t = 0; t < 5; ++t)
      part2.push_back(DemandSample{{rng.uniform(), rng.uniform()}, random_stochastic(2, rng)});
    InventoryVector x1{{0.5, 0.5}, 1.0};
    InventoryVector boundary = x1;
    for (const DemandSample& d : part1) boundary = state_update(S, d);
    std::vector<DemandSample> whole = part1;
    whole.insert(whole.end(), part2.begin(), part2.end());
    CHECK(evaluate_policy(S, whole, x1, cfg) ==
          doctest::Approx(evaluate_policy(S, part1, x1, cfg) +
                          evaluate_policy(S, part2, boundary, cfg))
              .epsilon(1e-9));
  }
}

TEST_CASE("best_base_stock_saa") {
  SUBCASE("deterministic sampler reduces to a plain offline solve") {
    NetworkConfig cfg = uniform_network(2, 1.0, 0.5);
    const DemandSample atom{{0.5, 0.3}, stochastic({{0.4, 0.6}, {0.2, 0.8}})};
    DemandSampler sampler = [&]() { return atom; };
    OfflineSolution saa = best_base_stock_saa(sampler, 7, cfg);
    History h;
    h.initial_state = InventoryVector{{0.5, 0.5}, 1.0};
    for (int s = 0; s < 7; ++s) h.samples.push_back(atom);
    OfflineSolution direct = solve_offline_lp(h, cfg);
    CHECK(saa.objective == doctest::Approx(direct.objective).epsilon(1e-9));
  }
  SUBCASE("two SAA runs land close together") {
    ScenarioSpec spec;
    spec.n = 3;
    spec.seed = 5150;
    NetworkConfig cfg = gen_network(spec);
    Rng r1 = derive_stream(1, 900, 0), r2 = derive_stream(2, 901, 0);
    auto make_sampler = [&cfg, &spec](Rng& rng) {
      return DemandSampler([&rng, &spec]() {
        DemandSample d;
        d.demand = gen_demand_independent(spec.n, rng);
        d.od_matrix = gen_transition_matrix(spec.n, rng);
        return d;
      });
    };
    OfflineSolution a = best_base_stock_saa(make_sampler(r1), 2000, cfg);
    OfflineSolution b = best_base_stock_saa(make_sampler(r2), 2000, cfg);
    CHECK(std::fabs(a.objective / 2000.0 - b.objective / 2000.0) <
          0.05 * std::fabs(a.objective / 2000.0));
  }
}

TEST_CASE("saa solution close to the grid optimum under common evaluation") {
  ScenarioSpec spec;
  spec.n = 3;
  spec.seed = 6211;
  NetworkConfig cfg = gen_network(spec);
  Rng sample_rng = derive_stream(spec.seed, 77, 0);
  DemandSampler sampler = [&]() {
    DemandSample d;
    d.demand = gen_demand_independent(3, sample_rng);
    d.od_matrix = gen_transition_matrix(3, sample_rng);
    return d;
  };
  OfflineSolution saa = best_base_stock_saa(sampler, 2000, cfg);

  // common evaluation set, fresh draws
  Rng eval_rng = derive_stream(spec.seed, 78, 0);
  History eval;
  eval.initial_state = InventoryVector{Vec(3, 1.0 / 3), 1.0};
  for (int s = 0; s < 500; ++s) {
    DemandSample d;
    d.demand = gen_demand_independent(3, eval_rng);
    d.od_matrix = gen_transition_matrix(3, eval_rng);
    eval.samples.push_back(std::move(d));
  }

  double grid_best = std::numeric_limits<double>::infinity();
  const double step = 0.02;
  for (double a = 0.0; a <= 1.0 + 1e-12; a += step) {
    for (double b = 0.0; a + b <= 1.0 + 1e-12; b += step) {
      InventoryVector S{{a, b, 1.0 - a - b}, 1.0};
      grid_best = std::min(grid_best, offline_objective_at(S, eval, cfg));
    }
  }
  const double saa_cost = offline_objective_at(saa.base_stock, eval, cfg);
  // per-period averages within 2%
  CHECK(saa_cost / 500.0 <= grid_best / 500.0 * (grid_best < 0 ? 0.98 : 1.02) + 1e-12);
}

TEST_CASE("empirical cost concentrates as the sample grows") {
  ScenarioSpec spec;
  spec.n = 3;
  spec.seed = 31337;
  NetworkConfig cfg = gen_network(spec);
  const InventoryVector S{{0.5, 0.3, 0.2}, 1.0};

  int improved = 0;
  double dev100_total = 0.0, dev1600_total = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng = derive_stream(spec.seed, 80, seed);
    // per-sample surrogate costs, averaged over prefixes
    Vec costs;
    History h;
    h.initial_state = InventoryVector{Vec(3, 1.0 / 3), 1.0};
    for (int s = 0; s < 4000; ++s) {
      DemandSample d;
      d.demand = gen_demand_independent(3, rng);
      d.od_matrix = gen_transition_matrix(3, rng);
      h.samples = {d};
      costs.push_back(offline_objective_at(S, h, cfg));
    }
    auto prefix_avg = [&](int t) {
      double s = 0.0;
      for (int k = 0; k < t; ++k) s += costs[k];
      return s / t;
    };
    const double avg4000 = prefix_avg(4000);
    const double dev100 = std::fabs(prefix_avg(100) - avg4000);
    const double dev1600 = std::fabs(prefix_avg(1600) - avg4000);
    dev100_total += dev100;
    dev1600_total += dev1600;
    if (dev1600 < dev100) ++improved;
  }
  CHECK(dev1600_total < dev100_total);
  CHECK(improved >= 16);
}
