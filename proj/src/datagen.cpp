#include "soar/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace soar {

double Rng::exponential(double mean) {
  // inverse CDF; 1 - uniform() stays in (0, 1]
  return -mean * std::log(1.0 - uniform());
}

double Rng::normal() {
  // Box-Muller, cosine branch only, so one call consumes two uniforms
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int Rng::uniform_int(int lo, int hi) {
  const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

Rng derive_stream(uint64_t seed, uint64_t stream_id, uint64_t index) {
  // run the key through one splitmix round per component
  Rng mixer(seed ^ (0xd1342543de82ef95ULL * stream_id));
  mixer.next_u64();
  mixer.state ^= 0x2545f4914f6cdd1dULL * index;
  mixer.next_u64();
  return Rng(mixer.state);
}

void ScenarioSpec::validate() const {
  if (n < 2) throw std::invalid_argument("ScenarioSpec: n must be at least 2");
  if (extended) {
    if (extended->H < 1) throw std::invalid_argument("ScenarioSpec: H must be at least 1");
    if (!(0.0 < extended->od_scale_lo && extended->od_scale_lo <= extended->od_scale_hi &&
          extended->od_scale_hi <= 1.0))
      throw std::invalid_argument("ScenarioSpec: invalid od_scale range");
  }
}

Mat gen_transition_matrix(int n, Rng& rng) {
  Mat q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = (j < 2) ? rng.exponential(10.0) : rng.uniform();
  for (int i = 0; i < n; ++i) q(i, i) *= 10.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += q(i, j);
    for (int j = 0; j < n; ++j) q(i, j) /= s;
  }
  return q;
}

Vec gen_demand_independent(int n, Rng& rng) {
  Vec d(n);
  for (int i = 1; i <= n; ++i)
    d[i - 1] = rng.uniform(0.3 * i / n, 0.6 * (i + 1) / n);
  return d;
}

CorrelatedDemandModel gen_correlated_model(int n, Rng& rng) {
  CorrelatedDemandModel model;
  model.n = n;
  model.A = Mat(n, n);
  for (double& a : model.A.a) a = rng.uniform();
  return model;
}

Vec gen_demand_correlated(const CorrelatedDemandModel& model, Rng& rng) {
  const int n = model.n;
  // v = mean + sqrt(10) A^T z gives covariance 10 A^T A
  Vec z(n);
  for (double& zi : z) zi = rng.normal();
  Vec v = model.A.transpose_times(z);
  const double scale = std::sqrt(10.0);
  for (int i = 0; i < n; ++i) v[i] = 2.0 / n + scale * v[i];
  for (int i = 1; i <= n; ++i) {
    const double lo = 0.2 + 0.2 * i / n;
    const double hi = 0.4 + 0.8 * i / n;
    v[i - 1] = std::clamp(v[i - 1], lo, hi);
  }
  return v;
}

std::pair<Mat, Mat> gen_costs(int n, CostMode mode, Rng& rng) {
  Mat l(n, n), c(n, n);
  for (double& x : l.a) x = rng.uniform(1.0, 2.0);
  const double c_lo = mode == CostMode::HighLostSales ? 0.5 : 5.0;
  const double c_hi = mode == CostMode::HighLostSales ? 1.0 : 10.0;
  for (double& x : c.a) x = rng.uniform(c_lo, c_hi);
  for (int i = 0; i < n; ++i) c(i, i) = 0.0;
  return {std::move(l), std::move(c)};
}

NetworkConfig gen_network(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng = derive_stream(spec.seed, kStreamCosts, 0);
  auto [l, c] = gen_costs(spec.n, spec.cost_mode, rng);
  return make_network_config(spec.n, std::move(l), std::move(c));
}

Mat gen_subperiod_od(int n, Rng& rng, double scale_lo, double scale_hi) {
  Mat q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = (j < 2) ? rng.exponential(5.0) : rng.uniform();
  for (int i = 0; i < n; ++i) {
    const double target = rng.uniform(scale_lo, scale_hi);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += q(i, j);
    for (int j = 0; j < n; ++j) q(i, j) *= target / s;
  }
  return q;
}

namespace {

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.uniform_int(0, i)]);
  return p;
}

}  // namespace

Trace gen_trace(const ScenarioSpec& spec, int T, uint64_t run) {
  spec.validate();
  if (T < 1) throw std::invalid_argument("gen_trace: T must be positive");
  Trace trace;
  trace.scenario = spec;
  const int n = spec.n;
  const uint64_t run_base = run << 32;

  // The extended generator always uses the network-dependence demand model.
  CorrelatedDemandModel corr;
  if (spec.demand_mode == DemandMode::CorrelatedTruncatedGaussian || spec.extended) {
    Rng rng = derive_stream(spec.seed, kStreamCorrModel, 0);
    corr = gen_correlated_model(n, rng);
  }

  if (!spec.extended) {
    Mat fixed_od;
    for (int t = 0; t < T; ++t) {
      DemandSample s;
      Rng drng = derive_stream(spec.seed, kStreamDemand, run_base | static_cast<uint64_t>(t));
      s.demand = spec.demand_mode == DemandMode::IndependentUniform
                     ? gen_demand_independent(n, drng)
                     : gen_demand_correlated(corr, drng);
      if (spec.redraw_od_each_period || t == 0) {
        Rng prng = derive_stream(spec.seed, kStreamOd, run_base | static_cast<uint64_t>(t));
        s.od_matrix = gen_transition_matrix(n, prng);
        if (t == 0) fixed_od = s.od_matrix;
      } else {
        s.od_matrix = fixed_od;
      }
      s.validate();
      trace.periods.push_back(std::move(s));
    }
    return trace;
  }

  const int H = spec.extended->H;
  std::vector<std::vector<int>> perms(H);
  for (int h = 0; h < H; ++h) {
    Rng rng = derive_stream(spec.seed, kStreamPermutations, h);
    perms[h] = random_permutation(n, rng);
  }
  for (int t = 0; t < T; ++t) {
    std::vector<SubperiodSample> subs;
    for (int h = 0; h < H; ++h) {
      const uint64_t idx = run_base | (static_cast<uint64_t>(t) * H + h);
      SubperiodSample s;
      Rng drng = derive_stream(spec.seed, kStreamDemand, idx);
      const Vec base = gen_demand_correlated(corr, drng);
      s.demand.resize(n);
      for (int i = 0; i < n; ++i) s.demand[i] = base[perms[h][i]];
      Rng prng = derive_stream(spec.seed, kStreamOd, idx);
      s.od_matrix = gen_subperiod_od(n, prng, spec.extended->od_scale_lo, spec.extended->od_scale_hi);
      s.validate();
      subs.push_back(std::move(s));
    }
    trace.subperiods.push_back(std::move(subs));
  }
  return trace;
}

std::vector<TwinDistribution::Atom> TwinDistribution::atoms() const {
  return {{1.0, 1.0, p}, {c, c, p}, {1.0, c, 0.5 - p}, {c, 1.0, 0.5 - p}};
}

std::pair<double, double> TwinDistribution::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const Atom& a : atoms()) {
    acc += a.prob;
    if (u < acc) return {a.x, a.y};
  }
  return {c, 1.0};
}

std::pair<TwinDistribution, TwinDistribution> censoring_twins(double c, double p1, double p2) {
  if (!(0.5 < c && c < 1.0)) throw std::invalid_argument("censoring_twins: c must lie in (0.5, 1)");
  auto check_p = [](double p) {
    if (!(0.0 < p && p < 0.5)) throw std::invalid_argument("censoring_twins: p must lie in (0, 0.5)");
  };
  check_p(p1);
  check_p(p2);
  if (p1 == p2) throw std::invalid_argument("censoring_twins: members must be distinct");
  return {TwinDistribution{c, p1}, TwinDistribution{c, p2}};
}

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : 0;
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int jj = 0; jj < cols; ++jj) m(i, jj) = j.at(i).at(jj).get<double>();
  return m;
}

json scenario_to_json(const ScenarioSpec& s) {
  json j;
  j["n"] = s.n;
  j["demand_mode"] =
      s.demand_mode == DemandMode::IndependentUniform ? "independent_uniform" : "correlated_truncated_gaussian";
  j["cost_mode"] = s.cost_mode == CostMode::HighLostSales ? "high_lost_sales" : "high_repositioning";
  j["seed"] = s.seed;
  j["redraw_od_each_period"] = s.redraw_od_each_period;
  if (s.extended) {
    j["extended"] = {{"H", s.extended->H},
                     {"od_scale_range", {s.extended->od_scale_lo, s.extended->od_scale_hi}}};
  }
  return j;
}

ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec s;
  s.n = j.at("n").get<int>();
  const std::string dm = j.at("demand_mode").get<std::string>();
  if (dm == "independent_uniform")
    s.demand_mode = DemandMode::IndependentUniform;
  else if (dm == "correlated_truncated_gaussian")
    s.demand_mode = DemandMode::CorrelatedTruncatedGaussian;
  else
    throw std::invalid_argument("trace file: unknown demand_mode '" + dm + "'");
  const std::string cm = j.at("cost_mode").get<std::string>();
  if (cm == "high_lost_sales")
    s.cost_mode = CostMode::HighLostSales;
  else if (cm == "high_repositioning")
    s.cost_mode = CostMode::HighRepositioning;
  else
    throw std::invalid_argument("trace file: unknown cost_mode '" + cm + "'");
  s.seed = j.at("seed").get<uint64_t>();
  s.redraw_od_each_period = j.value("redraw_od_each_period", true);
  if (j.contains("extended")) {
    ExtendedSpec e;
    e.H = j.at("extended").at("H").get<int>();
    const auto& r = j.at("extended").at("od_scale_range");
    e.od_scale_lo = r.at(0).get<double>();
    e.od_scale_hi = r.at(1).get<double>();
    s.extended = e;
  }
  return s;
}

}  // namespace

void write_trace(const Trace& t, const std::string& path) {
  json j;
  j["schema_version"] = 1;
  j["n"] = t.scenario.n;
  j["scenario"] = scenario_to_json(t.scenario);
  if (t.is_extended()) {
    j["H"] = t.scenario.extended ? t.scenario.extended->H
                                 : static_cast<int>(t.subperiods.front().size());
    json periods = json::array();
    for (const auto& subs : t.subperiods) {
      json sp = json::array();
      for (const SubperiodSample& s : subs)
        sp.push_back({{"d", s.demand}, {"P", mat_to_json(s.od_matrix)}});
      periods.push_back({{"subperiods", std::move(sp)}});
    }
    j["periods"] = std::move(periods);
  } else {
    json periods = json::array();
    for (const DemandSample& s : t.periods)
      periods.push_back({{"d", s.demand}, {"P", mat_to_json(s.od_matrix)}});
    j["periods"] = std::move(periods);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace: cannot open " + path);
  out << j.dump(2) << "\n";
}

Trace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    // e.what() reports the byte offset of the failure
    throw std::runtime_error("read_trace: malformed trace file " + path + ": " + e.what());
  }

  Trace t;
  t.scenario = scenario_from_json(j.at("scenario"));
  const bool extended = j.contains("H") || t.scenario.extended.has_value();
  for (const json& period : j.at("periods")) {
    if (extended) {
      std::vector<SubperiodSample> subs;
      for (const json& sp : period.at("subperiods")) {
        SubperiodSample s;
        s.demand = sp.at("d").get<Vec>();
        s.od_matrix = mat_from_json(sp.at("P"));
        s.validate();
        subs.push_back(std::move(s));
      }
      t.subperiods.push_back(std::move(subs));
    } else {
      DemandSample s;
      s.demand = period.at("d").get<Vec>();
      s.od_matrix = mat_from_json(period.at("P"));
      s.validate();
      t.periods.push_back(std::move(s));
    }
  }
  return t;
}

}  // namespace soar
