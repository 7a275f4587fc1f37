/*
 * Copyright 2026 the jdzsl authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Independent reference implementations used only by tests. None of these
// share code with the solvers they check.

#include <jdzsl/matrix.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

using jdzsl::Index;
using jdzsl::Matrix;
using jdzsl::Vector;

/// Cyclic coordinate descent for
///   minimize w*||t - D a||^2 + l1*||a||_1
/// run to tight convergence. Independent of the FISTA path.
inline Vector coordinate_descent_lasso(const Matrix& design,
                                       const Vector& target, double w,
                                       double l1, int max_sweeps = 20000,
                                       double tol = 1e-14) {
  const Index r = design.cols();
  Vector a = Vector::Zero(r);
  Vector col_sq(r);
  for (Index j = 0; j < r; ++j) col_sq[j] = design.col(j).squaredNorm();
  Vector residual = target;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Index j = 0; j < r; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double old = a[j];
      if (old != 0.0) residual += design.col(j) * old;
      const double rho = design.col(j).dot(residual);
      // shrinkage written out longhand so this stays independent of the
      // library's soft_threshold
      const double tau = l1 / (2.0 * w);
      double next;
      if (rho > tau)
        next = (rho - tau) / col_sq[j];
      else if (rho < -tau)
        next = (rho + tau) / col_sq[j];
      else
        next = 0.0;
      if (next != 0.0) residual -= design.col(j) * next;
      a[j] = next;
      max_delta = std::max(max_delta, std::abs(next - old));
    }
    if (max_delta < tol * std::max(1.0, a.lpNorm<Eigen::Infinity>())) break;
  }
  return a;
}

inline double lasso_objective(const Matrix& design, const Vector& target,
                              double w, double l1, const Vector& a) {
  double fit = (target - design * a).squaredNorm();
  double pen = 0.0;
  for (Index j = 0; j < a.size(); ++j) pen += std::abs(a[j]);
  return w * fit + l1 * pen;
}

/// Central finite differences of a scalar function of a vector.
template <typename F>
Vector finite_difference_gradient(F&& f, const Vector& a, double h = 1e-6) {
  Vector g(a.size());
  for (Index i = 0; i < a.size(); ++i) {
    Vector hi = a, lo = a;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

/// Exhaustive top-K membership check: true when `truth` is among the K
/// best-scoring classes of `row` under (score desc, index asc) order.
inline bool topk_contains(const Vector& row, int truth, int k) {
  std::vector<int> order(static_cast<size_t>(row.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  });
  for (int i = 0; i < k; ++i)
    if (order[static_cast<size_t>(i)] == truth) return true;
  return false;
}

/// Brute-force k nearest neighbors of column i (excluding i), ties broken by
/// lower index.
inline std::vector<Index> knn_of(const Matrix& points, Index i, int k) {
  const Index n = points.cols();
  std::vector<Index> order;
  for (Index j = 0; j < n; ++j)
    if (j != i) order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double da = (points.col(a) - points.col(i)).norm();
    const double db = (points.col(b) - points.col(i)).norm();
    if (da != db) return da < db;
    return a < b;
  });
  order.resize(static_cast<size_t>(k));
  return order;
}

}  // namespace oracle
