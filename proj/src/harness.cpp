#include "soar/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "soar/dynamics.hpp"
#include "soar/online.hpp"

namespace soar {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
  scenario.validate();
  if (T < 1) throw std::invalid_argument("ExperimentConfig: T must be >= 1");
  if (runs < 1) throw std::invalid_argument("ExperimentConfig: runs must be >= 1");
  if (algorithms.empty()) throw std::invalid_argument("ExperimentConfig: no algorithms requested");
  const bool extended = scenario.extended.has_value();
  for (const std::string& a : algorithms) {
    const bool known = a == "SOAR" || a == "SOAR-Extended" || a == "NR" || a == "OTL-LP" ||
                       a == "OTL-MILP" || a == "DL";
    if (!known) throw std::invalid_argument("ExperimentConfig: unknown algorithm '" + a + "'");
    if (extended && a != "SOAR-Extended" && a != "NR")
      throw std::invalid_argument("ExperimentConfig: '" + a + "' runs on base-model traces only");
    if (!extended && a == "SOAR-Extended")
      throw std::invalid_argument("ExperimentConfig: SOAR-Extended needs an extended scenario");
  }
  if (benchmark.kind == BenchmarkSpec::Kind::FixedS && !benchmark.fixed)
    throw std::invalid_argument("ExperimentConfig: FixedS benchmark without a vector");
  if (benchmark.kind == BenchmarkSpec::Kind::Saa && benchmark.saa_samples < 1)
    throw std::invalid_argument("ExperimentConfig: saa_samples must be >= 1");
}

Vec compute_regret_series(const EpisodeResult& alg, const EpisodeResult& bench) {
  if (alg.horizon() != bench.horizon())
    throw std::invalid_argument("compute_regret_series: horizons differ");
  if (alg.seed != bench.seed)
    throw std::invalid_argument("compute_regret_series: episodes come from different traces");
  Vec out(alg.horizon(), 0.0);
  double acc = 0.0;
  for (int t = 0; t < alg.horizon(); ++t) {
    acc += alg.period_costs[t] - bench.period_costs[t];
    out[t] = acc;
  }
  return out;
}

double relative_regret(double regret_T, double bench_cumulative) {
  const double denom = std::fabs(bench_cumulative);
  if (denom == 0.0)
    return regret_T == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), regret_T);
  return 100.0 * regret_T / denom;
}

std::pair<double, double> aggregate_ci(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("aggregate_ci: no values");
  const double k = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= k;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (k - 1.0));
  return {mean, 1.96 * sd / std::sqrt(k)};
}

namespace {

constexpr uint64_t kStreamSaaDraw = 64;

}  // namespace

DemandSampler make_scenario_sampler(const ScenarioSpec& spec) {
  spec.validate();
  auto corr = std::make_shared<CorrelatedDemandModel>();
  if (spec.demand_mode == DemandMode::CorrelatedTruncatedGaussian) {
    Rng rng = derive_stream(spec.seed, kStreamCorrModel, 0);
    *corr = gen_correlated_model(spec.n, rng);
  }
  auto rng = std::make_shared<Rng>(derive_stream(spec.seed, kStreamSaaDraw, 0));
  const ScenarioSpec s = spec;
  return [s, corr, rng]() {
    DemandSample d;
    d.demand = s.demand_mode == DemandMode::IndependentUniform
                   ? gen_demand_independent(s.n, *rng)
                   : gen_demand_correlated(*corr, *rng);
    d.od_matrix = gen_transition_matrix(s.n, *rng);
    d.validate();
    return d;
  };
}

ExtendedSampler make_scenario_sampler_extended(const ScenarioSpec& spec) {
  spec.validate();
  if (!spec.extended)
    throw std::invalid_argument("make_scenario_sampler_extended: scenario is not extended");
  const int H = spec.extended->H;
  const int n = spec.n;

  auto corr = std::make_shared<CorrelatedDemandModel>();
  {
    Rng rng = derive_stream(spec.seed, kStreamCorrModel, 0);
    *corr = gen_correlated_model(n, rng);
  }
  auto perms = std::make_shared<std::vector<std::vector<int>>>();
  for (int h = 0; h < H; ++h) {
    Rng rng = derive_stream(spec.seed, kStreamPermutations, h);
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.uniform_int(0, i)]);
    perms->push_back(std::move(p));
  }
  auto rng = std::make_shared<Rng>(derive_stream(spec.seed, kStreamSaaDraw, 1));
  const ScenarioSpec s = spec;
  return [s, corr, perms, rng, H, n]() {
    std::vector<SubperiodSample> subs(H);
    for (int h = 0; h < H; ++h) {
      const Vec base = gen_demand_correlated(*corr, *rng);
      subs[h].demand.resize(n);
      for (int i = 0; i < n; ++i) subs[h].demand[i] = base[(*perms)[h][i]];
      subs[h].od_matrix =
          gen_subperiod_od(n, *rng, s.extended->od_scale_lo, s.extended->od_scale_hi);
      subs[h].validate();
    }
    return subs;
  };
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// temp-file-then-rename so readers never observe a partial file
void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << contents;
  }
  fs::rename(tmp, path);
}

std::string episode_csv(const EpisodeResult& ep) {
  std::ostringstream out;
  const int n = ep.policies.empty() ? 0 : ep.policies.front().n();
  out << "period";
  for (int i = 1; i <= n; ++i) out << ",y_" << i;
  out << ",surrogate_cost,realized_cost\n";
  for (int t = 0; t < ep.horizon(); ++t) {
    out << (t + 1);
    for (int i = 0; i < n; ++i) out << "," << format_double(ep.policies[t].values[i]);
    out << "," << format_double(ep.surrogate_costs[t]) << ","
        << format_double(ep.period_costs[t]) << "\n";
  }
  return out.str();
}

EpisodeResult play_algorithm(const std::string& name, const Trace& trace, const InventoryVector& x1,
                             const NetworkConfig& net, const OtlConfig& otl) {
  if (name == "SOAR") return run_soar(trace.periods, x1, net);
  if (name == "SOAR-Extended") return run_soar_extended(trace.subperiods, x1, net);
  if (name == "NR")
    return trace.is_extended() ? run_nr_extended(trace.subperiods, x1, net)
                               : run_nr(trace.periods, x1, net);
  UncensoredOracle oracle(trace.periods);
  if (name == "OTL-LP") return run_otl(trace.periods, x1, net, otl, oracle, OfflineMode::ForceLp);
  if (name == "OTL-MILP")
    return run_otl(trace.periods, x1, net, otl, oracle, OfflineMode::ForceMilp);
  if (name == "DL") return run_dl_uncensored(trace.periods, x1, net, oracle);
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string version_string() {
  std::string v = "soar 0.1.0";
  FILE* pipe = popen("git describe --always --dirty 2>/dev/null", "r");
  if (pipe) {
    char buf[128];
    if (fgets(buf, sizeof(buf), pipe)) {
      std::string g(buf);
      while (!g.empty() && (g.back() == '\n' || g.back() == '\r')) g.pop_back();
      if (!g.empty()) v += " (" + g + ")";
    }
    pclose(pipe);
  }
  return v;
}

json scenario_manifest(const ScenarioSpec& s) {
  json j;
  j["n"] = s.n;
  j["demand_mode"] = s.demand_mode == DemandMode::IndependentUniform ? "independent_uniform"
                                                                     : "correlated_truncated_gaussian";
  j["cost_mode"] = s.cost_mode == CostMode::HighLostSales ? "high_lost_sales" : "high_repositioning";
  j["seed"] = s.seed;
  if (s.extended) j["extended"] = {{"H", s.extended->H}};
  return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  const NetworkConfig net = gen_network(cfg.scenario);
  const int n = cfg.scenario.n;
  const InventoryVector x1{Vec(n, 1.0 / n), 1.0};
  const bool extended = cfg.scenario.extended.has_value();

  ExperimentResult result;
  result.output_dir = cfg.output_dir;

  // Benchmark base-stock vector, computed once per scenario.
  OfflineSolution bench_sol;
  if (cfg.benchmark.kind == BenchmarkSpec::Kind::FixedS) {
    bench_sol.base_stock = *cfg.benchmark.fixed;
    bench_sol.solver_kind = OfflineSolverKind::SaaGrid;
    result.benchmark_expected_cost = 0.0;
  } else if (extended) {
    bench_sol = best_base_stock_saa_extended(make_scenario_sampler_extended(cfg.scenario),
                                             cfg.benchmark.saa_samples, net);
    result.benchmark_expected_cost = bench_sol.objective / cfg.benchmark.saa_samples;
  } else {
    bench_sol =
        best_base_stock_saa(make_scenario_sampler(cfg.scenario), cfg.benchmark.saa_samples, net);
    result.benchmark_expected_cost = bench_sol.objective / cfg.benchmark.saa_samples;
  }
  result.benchmark_stock = bench_sol.base_stock;

  // Every algorithm within one run consumes the identical trace object.
  struct RunTask {
    RunOutcome outcome;
    std::vector<std::string> failures;
  };
  auto execute_run = [&](int r) {
    RunTask task;
    task.outcome.seed = cfg.scenario.seed ^ (0x9e3779b97f4a7c15ULL * (r + 1));
    const Trace trace = gen_trace(cfg.scenario, cfg.T, static_cast<uint64_t>(r));
    task.outcome.benchmark =
        extended
            ? run_fixed_policy_extended(result.benchmark_stock, trace.subperiods, x1, net)
            : run_fixed_policy(result.benchmark_stock, trace.periods, x1, net);
    task.outcome.benchmark.seed = task.outcome.seed;
    for (const std::string& alg : cfg.algorithms) {
      try {
        EpisodeResult ep = play_algorithm(alg, trace, x1, net, cfg.otl);
        ep.seed = task.outcome.seed;
        ep.algorithm = alg;  // keep the requested tag even when OTL auto-resolves
        task.outcome.episodes[alg] = std::move(ep);
      } catch (const std::exception& e) {
        task.failures.push_back("run " + std::to_string(r) + " " + alg + ": " + e.what());
      }
    }
    return task;
  };

  const int workers =
      cfg.parallel > 0 ? cfg.parallel : std::max(1u, std::thread::hardware_concurrency());
  std::vector<RunTask> tasks(cfg.runs);
  if (workers <= 1 || cfg.runs == 1) {
    for (int r = 0; r < cfg.runs; ++r) tasks[r] = execute_run(r);
  } else {
    std::vector<std::future<RunTask>> futures;
    for (int r = 0; r < cfg.runs; ++r)
      futures.push_back(std::async(std::launch::async, execute_run, r));
    for (int r = 0; r < cfg.runs; ++r) tasks[r] = futures[r].get();
  }
  for (int r = 0; r < cfg.runs; ++r) {
    result.runs.push_back(std::move(tasks[r].outcome));
    for (std::string& f : tasks[r].failures) result.failures.push_back(std::move(f));
  }

  // Per-run episode files plus the long-format results table.
  std::ostringstream results_csv;
  results_csv << "run,algorithm,period,cumulative_cost,cumulative_regret,cumulative_pseudo_regret,"
                 "relative_regret_pct\n";
  std::map<std::string, std::vector<Vec>> regret_by_alg;  // per run, per period
  std::map<std::string, std::vector<Vec>> cumcost_by_alg;
  std::map<std::string, std::vector<Vec>> relpct_by_alg;

  for (int r = 0; r < cfg.runs; ++r) {
    const RunOutcome& run = result.runs[r];
    atomic_write(cfg.output_dir + "/episode_OPT_run" + std::to_string(r) + ".csv",
                 episode_csv(run.benchmark));
    for (const auto& [alg, ep] : run.episodes) {
      atomic_write(cfg.output_dir + "/episode_" + alg + "_run" + std::to_string(r) + ".csv",
                   episode_csv(ep));
      const Vec regret = compute_regret_series(ep, run.benchmark);
      Vec cum(ep.horizon()), rel(ep.horizon()), pseudo(ep.horizon());
      double acc = 0.0, bench_acc = 0.0;
      for (int t = 0; t < ep.horizon(); ++t) {
        acc += ep.period_costs[t];
        bench_acc += run.benchmark.period_costs[t];
        cum[t] = acc;
        rel[t] = relative_regret(regret[t], bench_acc);
        pseudo[t] = acc - (t + 1) * result.benchmark_expected_cost;
        results_csv << r << "," << alg << "," << (t + 1) << "," << format_double(cum[t]) << ","
                    << format_double(regret[t]) << "," << format_double(pseudo[t]) << ","
                    << format_double(rel[t]) << "\n";
      }
      regret_by_alg[alg].push_back(regret);
      cumcost_by_alg[alg].push_back(std::move(cum));
      relpct_by_alg[alg].push_back(std::move(rel));
    }
  }
  atomic_write(cfg.output_dir + "/results.csv", results_csv.str());

  // Summary: per-period means and intervals across runs.
  std::ostringstream summary_csv;
  summary_csv << "algorithm,period,mean_cumulative_cost,mean_cumulative_regret,regret_ci_half_width,"
                 "mean_relative_regret_pct,relative_regret_ci_half_width\n";
  for (const auto& [alg, regrets] : regret_by_alg) {
    const int T = static_cast<int>(regrets.front().size());
    for (int t = 0; t < T; ++t) {
      std::vector<double> reg_vals, rel_vals, cost_vals;
      for (size_t k = 0; k < regrets.size(); ++k) {
        reg_vals.push_back(regrets[k][t]);
        rel_vals.push_back(relpct_by_alg[alg][k][t]);
        cost_vals.push_back(cumcost_by_alg[alg][k][t]);
      }
      const auto [reg_mean, reg_ci] = aggregate_ci(reg_vals);
      const auto [rel_mean, rel_ci] = aggregate_ci(rel_vals);
      const auto [cost_mean, cost_ci] = aggregate_ci(cost_vals);
      (void)cost_ci;
      summary_csv << alg << "," << (t + 1) << "," << format_double(cost_mean) << ","
                  << format_double(reg_mean) << "," << format_double(reg_ci) << ","
                  << format_double(rel_mean) << "," << format_double(rel_ci) << "\n";
      if (t == T - 1) {
        ExperimentResult::Summary s;
        s.algorithm = alg;
        s.mean_regret = reg_mean;
        s.regret_ci = reg_ci;
        s.mean_relative_pct = rel_mean;
        s.relative_ci = rel_ci;
        result.summary.push_back(std::move(s));
      }
    }
  }
  atomic_write(cfg.output_dir + "/summary.csv", summary_csv.str());

  // Machine-readable manifest of what was run.
  json manifest;
  manifest["version"] = version_string();
  manifest["scenario"] = scenario_manifest(cfg.scenario);
  manifest["T"] = cfg.T;
  manifest["runs"] = cfg.runs;
  manifest["algorithms"] = cfg.algorithms;
  manifest["benchmark"] = {
      {"kind", cfg.benchmark.kind == BenchmarkSpec::Kind::Saa ? "saa" : "fixed"},
      {"saa_samples", cfg.benchmark.saa_samples},
      {"base_stock", result.benchmark_stock.values},
      {"expected_per_period_cost", result.benchmark_expected_cost},
  };
  manifest["otl"] = {{"exploration_samples", cfg.otl.exploration_samples}, {"eta", cfg.otl.eta}};
  json seeds = json::array();
  for (const RunOutcome& run : result.runs) seeds.push_back(run.seed);
  manifest["run_seeds"] = std::move(seeds);
  manifest["failures"] = result.failures;
  atomic_write(cfg.output_dir + "/manifest.json", manifest.dump(2) + "\n");

  return result;
}

}  // namespace soar
