// Small dense vector/matrix helpers shared across the library.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace soar {

using Vec = std::vector<double>;

struct Mat {
  int rows = 0;
  int cols = 0;
  Vec a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  bool square() const { return rows == cols; }

  // row sums, used for stochasticity checks
  Vec row_sums() const {
    Vec s(rows, 0.0);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) s[i] += (*this)(i, j);
    return s;
  }

  // w = M^T v
  Vec transpose_times(const Vec& v) const {
    if (static_cast<int>(v.size()) != rows) throw std::invalid_argument("transpose_times: size mismatch");
    Vec w(cols, 0.0);
    for (int i = 0; i < rows; ++i) {
      const double vi = v[i];
      if (vi == 0.0) continue;
      for (int j = 0; j < cols; ++j) w[j] += (*this)(i, j) * vi;
    }
    return w;
  }

  // w = M v
  Vec times(const Vec& v) const {
    if (static_cast<int>(v.size()) != cols) throw std::invalid_argument("times: size mismatch");
    Vec w(rows, 0.0);
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols; ++j) s += (*this)(i, j) * v[j];
      w[i] = s;
    }
    return w;
  }
};

inline double vec_sum(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline double l1_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

inline double l2_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline Vec elementwise_min(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("elementwise_min: size mismatch");
  Vec w(u.size());
  for (size_t i = 0; i < u.size(); ++i) w[i] = std::min(u[i], v[i]);
  return w;
}

inline Vec positive_part(const Vec& v) {
  Vec w(v.size());
  for (size_t i = 0; i < v.size(); ++i) w[i] = std::max(v[i], 0.0);
  return w;
}

inline Vec vec_sub(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("vec_sub: size mismatch");
  Vec w(u.size());
  for (size_t i = 0; i < u.size(); ++i) w[i] = u[i] - v[i];
  return w;
}

inline Vec vec_add(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("vec_add: size mismatch");
  Vec w(u.size());
  for (size_t i = 0; i < u.size(); ++i) w[i] = u[i] + v[i];
  return w;
}

}  // namespace soar
