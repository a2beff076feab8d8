#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "soar/datagen.hpp"
#include "soar/offline.hpp"

using namespace soar;

TEST_CASE("gen_transition_matrix") {
  Rng rng(1);
  SUBCASE("rows are stochastic by construction") {
    for (int trial = 0; trial < 200; ++trial) {
      const Mat P = gen_transition_matrix(2 + trial % 9, rng);
      for (double s : P.row_sums()) CHECK(std::fabs(s - 1.0) < 1e-12);
      for (double v : P.a) CHECK(v >= 0.0);
    }
  }
  SUBCASE("diagonal dominance on average") {
    // diagonal entries are boosted tenfold before normalization, so their
    // mean should clearly exceed the mean of the plain uniform columns
    const int n = 10;
    double diag = 0.0, off = 0.0;
    long diag_cnt = 0, off_cnt = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Mat P = gen_transition_matrix(n, rng);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) {
            diag += P(i, j);
            ++diag_cnt;
          } else if (j >= 2) {
            off += P(i, j);
            ++off_cnt;
          }
        }
    }
    CHECK(diag / diag_cnt > off / off_cnt);
  }
  SUBCASE("seed determinism") {
    Rng a(42), b(42);
    const Mat pa = gen_transition_matrix(5, a);
    const Mat pb = gen_transition_matrix(5, b);
    for (size_t k = 0; k < pa.a.size(); ++k) CHECK(pa.a[k] == pb.a[k]);
  }
}

TEST_CASE("gen_demand_independent") {
  Rng rng(2);
  const int n = 10;
  SUBCASE("support bounds") {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec d = gen_demand_independent(n, rng);
      for (int i = 1; i <= n; ++i) {
        CHECK(d[i - 1] >= 0.3 * i / n);
        CHECK(d[i - 1] <= 0.6 * (i + 1) / n);
      }
    }
  }
  SUBCASE("last location support is [0.3, 0.66] for n = 10") {
    double lo = 1e9, hi = -1e9;
    for (int trial = 0; trial < 20000; ++trial) {
      const Vec d = gen_demand_independent(n, rng);
      lo = std::min(lo, d[n - 1]);
      hi = std::max(hi, d[n - 1]);
    }
    CHECK(lo >= 0.3);
    CHECK(hi <= 0.66);
    CHECK(lo < 0.31);
    CHECK(hi > 0.65);
  }
  SUBCASE("empirical mean matches the uniform midpoint") {
    double mean = 0.0;
    const int draws = 100000;
    for (int trial = 0; trial < draws; ++trial) mean += gen_demand_independent(n, rng)[n - 1];
    mean /= draws;
    const double want = 0.5 * (0.3 + 0.6 * (n + 1.0) / n);
    CHECK(std::fabs(mean - want) / want < 0.01);
  }
}

TEST_CASE("gen_demand_correlated") {
  Rng model_rng(3);
  const int n = 6;
  const CorrelatedDemandModel model = gen_correlated_model(n, model_rng);
  Rng rng(4);

  SUBCASE("clamped into the stated intervals") {
    for (int trial = 0; trial < 2000; ++trial) {
      const Vec d = gen_demand_correlated(model, rng);
      for (int i = 1; i <= n; ++i) {
        CHECK(d[i - 1] >= 0.2 + 0.2 * i / n - 1e-12);
        CHECK(d[i - 1] <= 0.4 + 0.8 * i / n + 1e-12);
      }
    }
  }
  SUBCASE("last location interval is [0.4, 1.2]") {
    CHECK(0.2 + 0.2 * n / n == doctest::Approx(0.4));
    CHECK(0.4 + 0.8 * n / n == doctest::Approx(1.2));
  }
  SUBCASE("components are correlated") {
    // pre-clamp correlation comes from A^T A; check a visible signal on the
    // clamped draws of two low-index coordinates
    std::vector<double> a, b;
    for (int trial = 0; trial < 10000; ++trial) {
      const Vec d = gen_demand_correlated(model, rng);
      a.push_back(d[0]);
      b.push_back(d[1]);
    }
    double ma = 0.0, mb = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
      ma += a[k];
      mb += b[k];
    }
    ma /= a.size();
    mb /= b.size();
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
      cov += (a[k] - ma) * (b[k] - mb);
      va += (a[k] - ma) * (a[k] - ma);
      vb += (b[k] - mb) * (b[k] - mb);
    }
    const double rho = cov / std::sqrt(va * vb);
    CHECK(std::fabs(rho) > 0.05);
  }
}

TEST_CASE("gen_costs") {
  Rng rng(5);
  SUBCASE("high lost sales ranges") {
    auto [l, c] = gen_costs(10, CostMode::HighLostSales, rng);
    for (double v : l.a) {
      CHECK(v >= 1.0);
      CHECK(v <= 2.0);
    }
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        if (i == j)
          CHECK(c(i, j) == 0.0);
        else {
          CHECK(c(i, j) >= 0.5);
          CHECK(c(i, j) <= 1.0);
        }
      }
  }
  SUBCASE("high lost sales satisfies the cost condition") {
    for (int trial = 0; trial < 50; ++trial) {
      auto [l, c] = gen_costs(10, CostMode::HighLostSales, rng);
      NetworkConfig cfg = make_network_config(10, std::move(l), std::move(c));
      CHECK(check_cost_condition(cfg, {gen_transition_matrix(10, rng)}));
    }
  }
  SUBCASE("high repositioning violates the cost condition") {
    int violated = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
      auto [l, c] = gen_costs(10, CostMode::HighRepositioning, rng);
      NetworkConfig cfg = make_network_config(10, std::move(l), std::move(c));
      if (!check_cost_condition(cfg, {gen_transition_matrix(10, rng)})) ++violated;
    }
    CHECK(violated >= 95);
  }
  SUBCASE("seed determinism") {
    Rng a(7), b(7);
    auto [la, ca] = gen_costs(4, CostMode::HighRepositioning, a);
    auto [lb, cb] = gen_costs(4, CostMode::HighRepositioning, b);
    for (size_t k = 0; k < la.a.size(); ++k) CHECK(la.a[k] == lb.a[k]);
    for (size_t k = 0; k < ca.a.size(); ++k) CHECK(ca.a[k] == cb.a[k]);
  }
}

TEST_CASE("gen_trace extended") {
  ScenarioSpec spec;
  spec.n = 5;
  spec.seed = 11;
  spec.demand_mode = DemandMode::CorrelatedTruncatedGaussian;
  spec.extended = ExtendedSpec{4, 0.80, 0.99};
  const Trace trace = gen_trace(spec, 12);

  SUBCASE("row sums land in the scale range") {
    for (const auto& subs : trace.subperiods)
      for (const SubperiodSample& s : subs)
        for (double rs : s.od_matrix.row_sums()) {
          CHECK(rs >= 0.80 - 1e-12);
          CHECK(rs <= 0.99 + 1e-12);
        }
  }
  SUBCASE("permutations differ across subperiods") {
    // distinct permutations shuffle the demand profile; with n = 5 a
    // collision across two specific subperiods is rare
    std::set<Vec> profiles;
    for (const SubperiodSample& s : trace.subperiods.front()) profiles.insert(s.demand);
    CHECK(profiles.size() >= 3);
  }
  SUBCASE("determinism across calls") {
    const Trace again = gen_trace(spec, 12);
    for (int t = 0; t < 12; ++t)
      for (int h = 0; h < 4; ++h)
        for (int i = 0; i < 5; ++i)
          CHECK(trace.subperiods[t][h].demand[i] == again.subperiods[t][h].demand[i]);
  }
  SUBCASE("run index changes draws but not the scenario") {
    const Trace other = gen_trace(spec, 12, 1);
    bool any_diff = false;
    for (int i = 0; i < 5; ++i)
      if (trace.subperiods[0][0].demand[i] != other.subperiods[0][0].demand[i]) any_diff = true;
    CHECK(any_diff);
  }
}

TEST_CASE("censoring twins") {
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(censoring_twins(0.4, 0.1, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(censoring_twins(0.7, 0.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(censoring_twins(0.7, 0.2, 0.2), std::invalid_argument);
  }
  SUBCASE("marginal of X is one half at the top atom") {
    auto [a, b] = censoring_twins(0.7, 0.1, 0.4);
    for (const TwinDistribution& tw : {a, b}) {
      double p_top = 0.0;
      for (const auto& atom : tw.atoms())
        if (atom.x == 1.0) p_top += atom.prob;
      CHECK(p_top == doctest::Approx(0.5));
    }
  }
  SUBCASE("exact censored laws coincide, joint laws differ") {
    auto [a, b] = censoring_twins(0.7, 0.1, 0.4);
    // censor each atom through (min(x, x0), min(y, y0)) and compare laws
    for (int g = 0; g <= 20; ++g) {
      const double x0 = 0.05 * g, y0 = 1.0 - x0;
      std::map<std::pair<double, double>, double> la, lb;
      for (const auto& atom : a.atoms()) la[{std::min(atom.x, x0), std::min(atom.y, y0)}] += atom.prob;
      for (const auto& atom : b.atoms()) lb[{std::min(atom.x, x0), std::min(atom.y, y0)}] += atom.prob;
      double tv = 0.0;
      for (const auto& [k, v] : la) tv += std::fabs(v - (lb.count(k) ? lb.at(k) : 0.0));
      for (const auto& [k, v] : lb)
        if (!la.count(k)) tv += v;
      CHECK(tv / 2.0 < 1e-12);
    }
    // joint total variation is 2 |p1 - p2|
    double tv_joint = 0.0;
    for (size_t k = 0; k < a.atoms().size(); ++k)
      tv_joint += std::fabs(a.atoms()[k].prob - b.atoms()[k].prob);
    CHECK(tv_joint / 2.0 == doctest::Approx(2.0 * 0.3).epsilon(1e-12));
  }
  SUBCASE("specific censored support at x0 = 0.8") {
    auto [a, b] = censoring_twins(0.7, 0.1, 0.4);
    for (const TwinDistribution& tw : {a, b}) {
      std::map<std::pair<double, double>, double> law;
      for (const auto& atom : tw.atoms())
        law[{std::min(atom.x, 0.8), std::min(atom.y, 0.2)}] += atom.prob;
      CHECK(law.size() == 2);
      CHECK(law[{0.7, 0.2}] == doctest::Approx(0.5));
      CHECK(law[{0.8, 0.2}] == doctest::Approx(0.5));
    }
  }
  SUBCASE("sampling matches atom masses") {
    auto [a, b] = censoring_twins(0.7, 0.1, 0.4);
    (void)b;
    Rng rng(77);
    std::map<std::pair<double, double>, double> freq;
    const int draws = 200000;
    for (int s = 0; s < draws; ++s) freq[a.sample(rng)] += 1.0 / draws;
    CHECK(freq[{1.0, 1.0}] == doctest::Approx(0.1).epsilon(0.05));
    CHECK(freq[{0.7, 0.7}] == doctest::Approx(0.1).epsilon(0.05));
    CHECK(freq[{1.0, 0.7}] == doctest::Approx(0.4).epsilon(0.03));
    CHECK(freq[{0.7, 1.0}] == doctest::Approx(0.4).epsilon(0.03));
  }
}

TEST_CASE("trace file round trip") {
  namespace fs = std::filesystem;
  const std::string dir = fs::temp_directory_path() / "soar_trace_test";
  fs::create_directories(dir);

  SUBCASE("base model") {
    ScenarioSpec spec;
    spec.n = 3;
    spec.seed = 21;
    const Trace trace = gen_trace(spec, 7);
    const std::string path = dir + "/base.json";
    write_trace(trace, path);
    const Trace back = read_trace(path);
    REQUIRE(back.periods.size() == trace.periods.size());
    for (size_t t = 0; t < trace.periods.size(); ++t) {
      for (int i = 0; i < 3; ++i)
        CHECK(back.periods[t].demand[i] == trace.periods[t].demand[i]);
      for (size_t k = 0; k < trace.periods[t].od_matrix.a.size(); ++k)
        CHECK(back.periods[t].od_matrix.a[k] == trace.periods[t].od_matrix.a[k]);
    }
    CHECK(back.scenario.seed == spec.seed);
  }
  SUBCASE("extended schema") {
    ScenarioSpec spec;
    spec.n = 3;
    spec.seed = 22;
    spec.extended = ExtendedSpec{3, 0.80, 0.99};
    const Trace trace = gen_trace(spec, 4);
    const std::string path = dir + "/ext.json";
    write_trace(trace, path);
    const Trace back = read_trace(path);
    REQUIRE(back.is_extended());
    REQUIRE(back.subperiods.size() == 4);
    for (int t = 0; t < 4; ++t)
      for (int h = 0; h < 3; ++h)
        for (int i = 0; i < 3; ++i)
          CHECK(back.subperiods[t][h].demand[i] == trace.subperiods[t][h].demand[i]);
  }
  SUBCASE("malformed file reports position") {
    const std::string path = dir + "/bad.json";
    std::ofstream(path) << "{ \"schema_version\": 1, \"periods\": [ {";
    CHECK_THROWS_WITH_AS(read_trace(path), doctest::Contains("malformed"), std::runtime_error);
  }
}
