// Synthetic instance generation, the censoring-indistinguishability
// construction, and trace file I/O.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "soar/types.hpp"

namespace soar {

// Deterministic 64-bit generator (splitmix64). Distribution sampling is
// implemented by hand so traces are bit-identical across platforms.
struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed = 0) : state(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double exponential(double mean);
  double normal();  // standard normal, Box-Muller
  int uniform_int(int lo, int hi);  // inclusive bounds
};

// Derives an independent substream for (seed, stream id, index), so adding a
// generator never perturbs the draws of another.
Rng derive_stream(uint64_t seed, uint64_t stream_id, uint64_t index);

// Stream ids used by the trace generators.
enum : uint64_t {
  kStreamCosts = 1,
  kStreamOd = 2,
  kStreamDemand = 3,
  kStreamCorrModel = 4,
  kStreamPermutations = 5,
  kStreamOdScale = 6,
};

enum class DemandMode { IndependentUniform, CorrelatedTruncatedGaussian };
enum class CostMode { HighLostSales, HighRepositioning };

struct ExtendedSpec {
  int H = 1;
  double od_scale_lo = 0.80;
  double od_scale_hi = 0.99;
};

struct ScenarioSpec {
  int n = 2;
  DemandMode demand_mode = DemandMode::IndependentUniform;
  CostMode cost_mode = CostMode::HighLostSales;
  uint64_t seed = 0;
  std::optional<ExtendedSpec> extended;
  // Appendix-style experiments redraw the OD matrix every period; the fixed
  // variant reuses the period-1 draw.
  bool redraw_od_each_period = true;

  void validate() const;
};

struct Trace {
  std::vector<DemandSample> periods;                     // base model
  std::vector<std::vector<SubperiodSample>> subperiods;  // extended model
  ScenarioSpec scenario;

  bool is_extended() const { return !subperiods.empty(); }
  int length() const {
    return is_extended() ? static_cast<int>(subperiods.size()) : static_cast<int>(periods.size());
  }
};

// Row-stochastic OD matrix: first two columns Exp(mean 10), the rest
// Unif(0,1), diagonal scaled by 10, rows normalized.
Mat gen_transition_matrix(int n, Rng& rng);

// d_i ~ Unif(0.3 i/n, 0.6 (i+1)/n) independently, 1-based i.
Vec gen_demand_independent(int n, Rng& rng);

// Correlation model drawn once per scenario: v ~ N((2/n) 1, 10 A^T A) with
// A ~ Unif(0,1)^{n x n}, then v_i clamped into [0.2 + 0.2 i/n, 0.4 + 0.8 i/n].
struct CorrelatedDemandModel {
  Mat A;
  int n = 0;
};
CorrelatedDemandModel gen_correlated_model(int n, Rng& rng);
Vec gen_demand_correlated(const CorrelatedDemandModel& model, Rng& rng);

// (lost_sales, repo_cost) pair for the scenario's cost regime.
std::pair<Mat, Mat> gen_costs(int n, CostMode mode, Rng& rng);

// Network built from the scenario's cost stream.
NetworkConfig gen_network(const ScenarioSpec& spec);

// T periods of demand/OD draws for the scenario (base or extended). The
// run index selects an independent demand/OD stream while the per-scenario
// draws (costs, correlation model, permutations) stay fixed.
Trace gen_trace(const ScenarioSpec& spec, int T, uint64_t run = 0);

// Substochastic OD matrix for the extended model: columns 1-2 Exp(mean 5),
// rest Unif(0,1), each row normalized to an independent Unif(0.80, 0.99) sum.
Mat gen_subperiod_od(int n, Rng& rng, double scale_lo = 0.80, double scale_hi = 0.99);

// Bivariate discrete demand distribution on four atoms; two members with
// different p share every censored law (atoms at (1,1) and (c,c) with mass p,
// (1,c) and (c,1) with mass 0.5 - p).
struct TwinDistribution {
  double c = 0.7;
  double p = 0.25;

  struct Atom {
    double x, y, prob;
  };
  std::vector<Atom> atoms() const;
  std::pair<double, double> sample(Rng& rng) const;
};

std::pair<TwinDistribution, TwinDistribution> censoring_twins(double c, double p1, double p2);

void write_trace(const Trace& t, const std::string& path);
Trace read_trace(const std::string& path);

}  // namespace soar
