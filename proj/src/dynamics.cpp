#include "soar/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace soar {

namespace {

void check_same_n(int a, int b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

CensoredObservation censor(const InventoryVector& y, const DemandSample& d) {
  check_same_n(y.n(), d.n(), "censor");
  const int n = y.n();
  CensoredObservation obs;
  obs.fulfilled.resize(n);
  obs.binding.resize(n);
  obs.od_matrix = d.od_matrix;
  for (int i = 0; i < n; ++i) {
    obs.fulfilled[i] = std::min(y.values[i], d.demand[i]);
    obs.binding[i] = std::fabs(obs.fulfilled[i] - y.values[i]) <= kBindingTol ? 1 : 0;
  }
  return obs;
}

InventoryVector state_update(const InventoryVector& y, const DemandSample& d) {
  check_same_n(y.n(), d.n(), "state_update");
  d.validate();  // rejects non-stochastic OD rows
  const Vec fulfilled = elementwise_min(y.values, d.demand);
  Vec next = positive_part(vec_sub(y.values, d.demand));
  const Vec returned = d.od_matrix.transpose_times(fulfilled);
  for (int i = 0; i < y.n(); ++i) next[i] += returned[i];
  return InventoryVector{std::move(next), y.total};
}

double lost_sales_cost(const InventoryVector& y, const DemandSample& d, const NetworkConfig& cfg) {
  check_same_n(y.n(), d.n(), "lost_sales_cost");
  check_same_n(y.n(), cfg.n, "lost_sales_cost");
  double cost = 0.0;
  for (int i = 0; i < cfg.n; ++i) {
    const double unmet = std::max(d.demand[i] - y.values[i], 0.0);
    if (unmet == 0.0) continue;
    for (int j = 0; j < cfg.n; ++j) cost += cfg.lost_sales(i, j) * d.od_matrix(i, j) * unmet;
  }
  return cost;
}

double modified_cost(const InventoryVector& x, const InventoryVector& y, const DemandSample& d,
                     const NetworkConfig& cfg) {
  check_same_n(x.n(), y.n(), "modified_cost");
  check_same_n(y.n(), d.n(), "modified_cost");
  if (std::fabs(x.total - y.total) > kMassTol)
    throw std::invalid_argument("modified_cost: x and y totals differ");
  const double move = repositioning_cost(vec_sub(y.values, x.values), cfg);
  double fulfilled_value = 0.0;
  for (int i = 0; i < cfg.n; ++i) {
    const double w = std::min(d.demand[i], y.values[i]);
    if (w == 0.0) continue;
    for (int j = 0; j < cfg.n; ++j) fulfilled_value += cfg.lost_sales(i, j) * d.od_matrix(i, j) * w;
  }
  return move - fulfilled_value;
}

double total_cost(const InventoryVector& x, const InventoryVector& y, const DemandSample& d,
                  const NetworkConfig& cfg) {
  return repositioning_cost(vec_sub(y.values, x.values), cfg) + lost_sales_cost(y, d, cfg);
}

ExtendedState state_update_extended(const ExtendedState& s, const SubperiodSample& sub) {
  check_same_n(s.n(), sub.n(), "state_update_extended");
  sub.validate();  // rejects row sums above 1
  const int n = s.n();
  const Vec fulfilled = elementwise_min(s.on_hand, sub.demand);
  Vec in_transit(n);  // rentals in motion this subperiod: new pickups plus carryover
  for (int i = 0; i < n; ++i) in_transit[i] = fulfilled[i] + s.outstanding[i];

  ExtendedState next;
  next.on_hand = positive_part(vec_sub(s.on_hand, sub.demand));
  const Vec returned = sub.od_matrix.transpose_times(in_transit);
  for (int i = 0; i < n; ++i) next.on_hand[i] += returned[i];

  const Vec row_sums = sub.od_matrix.row_sums();
  next.outstanding.resize(n);
  for (int i = 0; i < n; ++i) next.outstanding[i] = in_transit[i] * (1.0 - row_sums[i]);
  return next;
}

ExtendedPeriodOutcome extended_modified_cost(const InventoryVector& x_prev, const InventoryVector& y,
                                             const std::vector<SubperiodSample>& subs,
                                             const NetworkConfig& cfg) {
  if (subs.empty()) throw std::invalid_argument("extended_modified_cost: empty subperiod list");
  check_same_n(x_prev.n(), y.n(), "extended_modified_cost");
  if (std::fabs(x_prev.total - y.total) > kMassTol)
    throw std::invalid_argument("extended_modified_cost: totals differ");

  ExtendedPeriodOutcome out;
  out.cost = repositioning_cost(vec_sub(y.values, x_prev.values), cfg);

  ExtendedState state{y.values, Vec(y.n(), 0.0)};
  for (const SubperiodSample& sub : subs) {
    check_same_n(state.n(), sub.n(), "extended_modified_cost");
    const Vec fulfilled = elementwise_min(state.on_hand, sub.demand);
    for (int i = 0; i < cfg.n; ++i) {
      if (fulfilled[i] == 0.0) continue;
      for (int j = 0; j < cfg.n; ++j)
        out.cost -= cfg.lost_sales(i, j) * sub.od_matrix(i, j) * fulfilled[i];
    }
    CensoredObservation obs;
    obs.fulfilled = fulfilled;
    obs.od_matrix = sub.od_matrix;
    obs.binding.resize(state.n());
    for (int i = 0; i < state.n(); ++i)
      obs.binding[i] = std::fabs(fulfilled[i] - state.on_hand[i]) <= kBindingTol ? 1 : 0;
    out.observations.push_back(std::move(obs));
    state = state_update_extended(state, sub);
  }

  // Units still outstanding when the period closes go back to their origin
  // location ahead of the next repositioning.
  Vec end = state.on_hand;
  for (int i = 0; i < y.n(); ++i) end[i] += state.outstanding[i];
  out.end_inventory = InventoryVector{std::move(end), y.total};
  return out;
}

}  // namespace soar
