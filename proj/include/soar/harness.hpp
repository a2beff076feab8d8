// Experiment orchestration: run algorithm suites on common traces, compute
// regret metrics with confidence intervals, and emit CSV results.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "soar/baselines.hpp"
#include "soar/datagen.hpp"
#include "soar/episode.hpp"
#include "soar/offline.hpp"

namespace soar {

struct BenchmarkSpec {
  enum class Kind { Saa, FixedS };
  Kind kind = Kind::Saa;
  int saa_samples = 2000;
  std::optional<InventoryVector> fixed;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  int T = 100;
  int runs = 1;
  std::vector<std::string> algorithms;  // SOAR, SOAR-Extended, NR, OTL-LP, OTL-MILP, DL
  BenchmarkSpec benchmark;
  std::string output_dir = "results";
  OtlConfig otl;
  int parallel = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Per-period cumulative regret against a benchmark episode that consumed the
// identical trace.
Vec compute_regret_series(const EpisodeResult& alg, const EpisodeResult& bench);

// 100 * regret / |benchmark cumulative cost| (modified costs can be
// negative, so the denominator is taken in absolute value).
double relative_regret(double regret_T, double bench_cumulative);

// (mean, 1.96 * stderr) over per-run metric values.
std::pair<double, double> aggregate_ci(const std::vector<double>& values);

// Fresh draws from the scenario's demand distribution, for the SAA
// benchmark. Deterministic in the scenario seed.
DemandSampler make_scenario_sampler(const ScenarioSpec& spec);
ExtendedSampler make_scenario_sampler_extended(const ScenarioSpec& spec);

struct RunOutcome {
  uint64_t seed = 0;
  EpisodeResult benchmark;
  std::map<std::string, EpisodeResult> episodes;
};

struct ExperimentResult {
  std::string output_dir;
  InventoryVector benchmark_stock;
  double benchmark_expected_cost = 0.0;  // per-period, SAA in-sample estimate
  std::vector<RunOutcome> runs;
  std::vector<std::string> failures;  // "run <k> <algorithm>: <reason>"

  struct Summary {
    std::string algorithm;
    double mean_regret = 0.0, regret_ci = 0.0;
    double mean_relative_pct = 0.0, relative_ci = 0.0;
  };
  std::vector<Summary> summary;
};

// Generates one trace per run, computes the benchmark once, plays every
// requested algorithm on the identical traces, and writes per-run CSVs, a
// long-format results CSV, a summary CSV, and a manifest.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace soar
