#include "soar/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace soar {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double NetworkConfig::max_repo_cost() const {
  double m = 0.0;
  for (double c : repo_cost.a) m = std::max(m, c);
  return m;
}

double NetworkConfig::max_lost_sales() const {
  double m = 0.0;
  for (double l : lost_sales.a) m = std::max(m, l);
  return m;
}

void NetworkConfig::validate() const {
  require(n >= 2, "NetworkConfig: need at least two locations");
  require(lost_sales.rows == n && lost_sales.cols == n, "NetworkConfig: lost_sales must be n x n");
  require(repo_cost.rows == n && repo_cost.cols == n, "NetworkConfig: repo_cost must be n x n");
  for (double l : lost_sales.a) require(l >= 0.0, "NetworkConfig: negative lost-sales cost");
  for (double c : repo_cost.a) require(c >= 0.0, "NetworkConfig: negative repositioning cost");
  for (int i = 0; i < n; ++i)
    require(repo_cost(i, i) == 0.0, "NetworkConfig: diagonal repositioning cost must be zero");
}

NetworkConfig make_network_config(int n, Mat lost_sales, Mat repo_cost) {
  for (int i = 0; i < n && i < repo_cost.rows; ++i) repo_cost(i, i) = 0.0;
  NetworkConfig cfg{n, std::move(lost_sales), std::move(repo_cost)};
  cfg.validate();
  return cfg;
}

void InventoryVector::validate() const {
  require(total > 0.0, "InventoryVector: total must be positive");
  double s = 0.0;
  for (double x : values) {
    require(x >= -kMassTol, "InventoryVector: negative entry");
    s += x;
  }
  require(std::fabs(s - total) <= kMassTol * std::max(1.0, total),
          "InventoryVector: entries must sum to total");
}

InventoryVector make_inventory(Vec values, double total) {
  InventoryVector y{std::move(values), total};
  y.validate();
  return y;
}

void DemandSample::validate() const {
  const int m = n();
  require(m >= 1, "DemandSample: empty demand");
  require(od_matrix.rows == m && od_matrix.cols == m, "DemandSample: OD matrix must be n x n");
  for (double d : demand) require(d >= 0.0, "DemandSample: negative demand");
  for (double p : od_matrix.a) require(p >= -1e-12 && p <= 1.0 + 1e-12, "DemandSample: OD entry outside [0,1]");
  for (double s : od_matrix.row_sums())
    require(std::fabs(s - 1.0) <= kMassTol, "DemandSample: OD rows must be stochastic");
}

void SubperiodSample::validate() const {
  const int m = n();
  require(m >= 1, "SubperiodSample: empty demand");
  require(od_matrix.rows == m && od_matrix.cols == m, "SubperiodSample: OD matrix must be n x n");
  for (double d : demand) require(d >= 0.0, "SubperiodSample: negative demand");
  for (double p : od_matrix.a)
    require(p >= -1e-12 && p <= 1.0 + 1e-12, "SubperiodSample: OD entry outside [0,1]");
  for (double s : od_matrix.row_sums())
    require(s <= 1.0 + kMassTol, "SubperiodSample: OD row sum exceeds 1");
}

void ExtendedState::validate(double total) const {
  require(on_hand.size() == outstanding.size(), "ExtendedState: size mismatch");
  for (double x : on_hand) require(x >= -kMassTol, "ExtendedState: negative on-hand entry");
  for (double g : outstanding) require(g >= -kMassTol, "ExtendedState: negative outstanding entry");
  const double s = vec_sum(on_hand) + vec_sum(outstanding);
  require(std::fabs(s - total) <= kMassTol * std::max(1.0, total),
          "ExtendedState: combined mass must equal total");
}

}  // namespace soar
