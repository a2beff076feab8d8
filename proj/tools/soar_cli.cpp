// Command-line entry point: trace generation, offline solves, experiment
// runs, and the censoring-twins demonstration.
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "soar/datagen.hpp"
#include "soar/harness.hpp"
#include "soar/offline.hpp"

namespace {

using nlohmann::json;
using namespace soar;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

ScenarioSpec scenario_from_config(const json& j) {
  ScenarioSpec s;
  s.n = j.at("n").get<int>();
  const std::string dm = j.value("demand_mode", "independent_uniform");
  if (dm == "independent_uniform")
    s.demand_mode = DemandMode::IndependentUniform;
  else if (dm == "correlated_truncated_gaussian")
    s.demand_mode = DemandMode::CorrelatedTruncatedGaussian;
  else
    throw std::invalid_argument("config: unknown demand_mode '" + dm + "'");
  const std::string cm = j.value("cost_mode", "high_lost_sales");
  if (cm == "high_lost_sales")
    s.cost_mode = CostMode::HighLostSales;
  else if (cm == "high_repositioning")
    s.cost_mode = CostMode::HighRepositioning;
  else
    throw std::invalid_argument("config: unknown cost_mode '" + cm + "'");
  s.seed = j.value("seed", 0ULL);
  s.redraw_od_each_period = j.value("redraw_od_each_period", true);
  if (j.contains("extended")) {
    ExtendedSpec e;
    e.H = j.at("extended").at("H").get<int>();
    if (j.at("extended").contains("od_scale_range")) {
      e.od_scale_lo = j.at("extended").at("od_scale_range").at(0).get<double>();
      e.od_scale_hi = j.at("extended").at("od_scale_range").at(1).get<double>();
    }
    s.extended = e;
  }
  return s;
}

ExperimentConfig experiment_from_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.scenario = scenario_from_config(j.at("scenario"));
  cfg.T = j.value("T", 100);
  cfg.runs = j.value("runs", 1);
  cfg.algorithms = j.value("algorithms", std::vector<std::string>{"SOAR", "NR"});
  if (j.contains("benchmark")) {
    const json& b = j.at("benchmark");
    const std::string kind = b.value("kind", "saa");
    if (kind == "saa") {
      cfg.benchmark.kind = BenchmarkSpec::Kind::Saa;
      cfg.benchmark.saa_samples = b.value("saa_samples", 2000);
    } else if (kind == "fixed") {
      cfg.benchmark.kind = BenchmarkSpec::Kind::FixedS;
      Vec v = b.at("base_stock").get<Vec>();
      cfg.benchmark.fixed = make_inventory(std::move(v));
    } else {
      throw std::invalid_argument("config: unknown benchmark kind '" + kind + "'");
    }
  }
  cfg.output_dir = j.value("output_dir", std::string("results"));
  if (j.contains("otl")) {
    cfg.otl.exploration_samples = j.at("otl").value("exploration_samples", 20);
    cfg.otl.eta = j.at("otl").value("eta", 1.0);
  }
  cfg.parallel = j.value("parallel", 0);
  return cfg;
}

json offline_solution_json(const OfflineSolution& sol, int n) {
  const char* kind = sol.solver_kind == OfflineSolverKind::Milp
                         ? "MILP"
                         : (sol.solver_kind == OfflineSolverKind::Lp ? "LP" : "SAA-grid");
  return json{{"n", n},
              {"base_stock", sol.base_stock.values},
              {"objective", sol.objective},
              {"solver_kind", kind},
              {"gap", sol.optimality_gap}};
}

int cmd_generate(const std::string& out, uint64_t seed, int n, int T, const std::string& demand,
                 const std::string& cost, int H) {
  ScenarioSpec spec;
  spec.n = n;
  spec.seed = seed;
  spec.demand_mode = demand == "correlated" ? DemandMode::CorrelatedTruncatedGaussian
                                            : DemandMode::IndependentUniform;
  spec.cost_mode = cost == "high_repositioning" ? CostMode::HighRepositioning
                                                : CostMode::HighLostSales;
  if (H > 0) spec.extended = ExtendedSpec{H, 0.80, 0.99};
  const Trace trace = gen_trace(spec, T);
  write_trace(trace, out);
  std::cout << "wrote " << T << " periods (n=" << n << (H > 0 ? ", H=" + std::to_string(H) : "")
            << ") to " << out << "\n";
  return kExitOk;
}

int cmd_solve_offline(const std::string& trace_path, const std::string& solver,
                      const std::string& out) {
  const Trace trace = read_trace(trace_path);
  const NetworkConfig net = gen_network(trace.scenario);
  History h;
  h.initial_state = InventoryVector{Vec(trace.scenario.n, 1.0 / trace.scenario.n), 1.0};
  h.samples = trace.periods;
  h.extended_samples = trace.subperiods;

  OfflineSolution sol;
  if (solver == "milp")
    sol = solve_offline_milp(h, net);
  else if (solver == "lp")
    sol = solve_offline_lp(h, net);
  else
    sol = check_cost_condition(net, h) ? solve_offline_lp(h, net) : solve_offline_milp(h, net);

  const json doc = offline_solution_json(sol, trace.scenario.n);
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream f(out);
    f << doc.dump(2) << "\n";
    std::cout << "wrote solution to " << out << "\n";
  }
  return kExitOk;
}

int cmd_twins(double c, double p1, double p2, long samples, uint64_t seed) {
  auto [a, b] = censoring_twins(c, p1, p2);
  Rng rng_a(seed), rng_b(seed ^ 0x5851f42d4c957f2dULL);

  std::cout << "joint laws differ: exact total variation = " << 2.0 * std::fabs(p1 - p2) << "\n";
  std::cout << "censored laws on the x0 grid (x0 + y0 = 1):\n";
  std::cout << "x0,tv_empirical\n";
  for (int g = 0; g <= 20; ++g) {
    const double x0 = 0.05 * g;
    const double y0 = 1.0 - x0;
    std::map<std::pair<double, double>, double> hist_a, hist_b;
    Rng ra = rng_a, rb = rng_b;
    for (long s = 0; s < samples; ++s) {
      auto [xa, ya] = a.sample(ra);
      auto [xb, yb] = b.sample(rb);
      hist_a[{std::min(xa, x0), std::min(ya, y0)}] += 1.0 / samples;
      hist_b[{std::min(xb, x0), std::min(yb, y0)}] += 1.0 / samples;
    }
    double tv = 0.0;
    for (const auto& [k, v] : hist_a) tv += std::fabs(v - (hist_b.count(k) ? hist_b[k] : 0.0));
    for (const auto& [k, v] : hist_b)
      if (!hist_a.count(k)) tv += v;
    std::cout << x0 << "," << tv / 2.0 << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-network inventory repositioning: simulator, solvers, and experiments"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic trace file");
  std::string gen_out = "trace.json";
  uint64_t gen_seed = 0;
  int gen_n = 10, gen_T = 500, gen_H = 0;
  std::string gen_demand = "independent", gen_cost = "high_lost_sales";
  gen->add_option("--out", gen_out, "Output trace file");
  gen->add_option("--seed", gen_seed, "Scenario seed");
  gen->add_option("-n,--locations", gen_n, "Number of locations");
  gen->add_option("-T,--periods", gen_T, "Number of periods");
  gen->add_option("--demand", gen_demand, "independent | correlated");
  gen->add_option("--cost", gen_cost, "high_lost_sales | high_repositioning");
  gen->add_option("--subperiods", gen_H, "Subperiods per period (extended model; 0 = base)");

  // solve-offline
  auto* solve = app.add_subcommand("solve-offline", "Best base-stock vector for a trace file");
  std::string solve_trace, solve_solver = "auto", solve_out;
  solve->add_option("--trace", solve_trace, "Trace file")->required();
  solve->add_option("--solver", solve_solver, "auto | lp | milp");
  solve->add_option("--out", solve_out, "Write the solution JSON here instead of stdout");

  // run
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string run_config, run_out, run_algorithms;
  uint64_t run_seed = 0;
  bool run_seed_set = false;
  int run_parallel = 0;
  run->add_option("--config", run_config, "Experiment config JSON")->required();
  run->add_option("--out", run_out, "Override output directory");
  run->add_option("--algorithms", run_algorithms, "Comma-separated algorithm list override");
  run->add_option("--seed", run_seed, "Override scenario seed")->each([&](const std::string&) {
    run_seed_set = true;
  });
  run->add_option("--parallel", run_parallel, "Worker count for the run pool");

  // twins
  auto* twins = app.add_subcommand("twins", "Censoring indistinguishability demo");
  double tw_c = 0.7, tw_p1 = 0.1, tw_p2 = 0.4;
  long tw_samples = 100000;
  uint64_t tw_seed = 1;
  twins->add_option("--c", tw_c, "Common atom level c in (0.5, 1)");
  twins->add_option("--p1", tw_p1, "First member's diagonal mass");
  twins->add_option("--p2", tw_p2, "Second member's diagonal mass");
  twins->add_option("--samples", tw_samples, "Draws per distribution");
  twins->add_option("--seed", tw_seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed())
      return cmd_generate(gen_out, gen_seed, gen_n, gen_T, gen_demand, gen_cost, gen_H);
    if (solve->parsed()) return cmd_solve_offline(solve_trace, solve_solver, solve_out);
    if (twins->parsed()) return cmd_twins(tw_c, tw_p1, tw_p2, tw_samples, tw_seed);
    if (run->parsed()) {
      ExperimentConfig cfg;
      try {
        cfg = experiment_from_config(run_config);
        if (!run_out.empty()) cfg.output_dir = run_out;
        if (run_seed_set) cfg.scenario.seed = run_seed;
        if (run_parallel > 0) cfg.parallel = run_parallel;
        if (!run_algorithms.empty()) {
          cfg.algorithms.clear();
          std::string token;
          for (char ch : run_algorithms + ",") {
            if (ch == ',') {
              if (!token.empty()) cfg.algorithms.push_back(token);
              token.clear();
            } else {
              token += ch;
            }
          }
        }
        cfg.validate();
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
      }
      const ExperimentResult res = run_experiment(cfg);
      std::cout << "benchmark S = [";
      for (int i = 0; i < res.benchmark_stock.n(); ++i)
        std::cout << (i ? ", " : "") << res.benchmark_stock.values[i];
      std::cout << "]\n";
      for (const auto& s : res.summary)
        std::cout << s.algorithm << ": regret " << s.mean_regret << " +- " << s.regret_ci
                  << ", relative " << s.mean_relative_pct << "% +- " << s.relative_ci << "%\n";
      for (const std::string& f : res.failures) std::cerr << "failure: " << f << "\n";
      std::cout << "results in " << res.output_dir << "\n";
      return res.failures.empty() ? kExitOk : kExitSolver;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
