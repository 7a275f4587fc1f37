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

#include <jdzsl/data.hpp>
#include <jdzsl/sparse_opt.hpp>

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace jdzsl {

/// The coupled dictionary pair. Columns of both factors obey
/// ||column||_2 <= 1; the shared atom count exceeds max(p, q).
struct JointDictionary {
  Matrix dx;  // p x r
  Matrix dz;  // q x r
  Index atoms() const { return dx.cols(); }
};

struct TrainReport {
  std::vector<double> objective_trace;  // entry 0 is the zero-code baseline
  Matrix codes_a;                       // r x N
  Matrix codes_b;                       // r x M
};

/// Projects each column onto the unit l2 ball: columns with norm > 1 are
/// rescaled to norm 1, feasible columns pass through unchanged.
inline Matrix project_columns(Matrix d) {
  for (Index j = 0; j < d.cols(); ++j) {
    const double n = d.col(j).norm();
    if (n > 1.0) d.col(j) /= n;
  }
  return d;
}

/// Seeded Gaussian initialization with unit-norm columns.
inline JointDictionary init_dictionaries(Index p, Index q,
                                         const HyperParams& params) {
  validate(params);
  if (params.r <= std::max(p, q))
    throw data_error("under-complete dictionary: r = " +
                     std::to_string(params.r) + " must exceed max(p, q) = " +
                     std::to_string(std::max(p, q)));

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    normalize_columns(m);
    return m;
  };

  JointDictionary dict;
  dict.dx = draw(p, params.r);
  dict.dz = draw(q, params.r);
  return dict;
}

/// Full joint training objective:
///   (1/(Np)) (||X - Dx A||_F^2 + (p lambda / r) ||A||_1)
/// + (1/(Nq))  ||Z - Dz A||_F^2
/// + (1/(Mq)) (||Z' - Dz B||_F^2 + (q lambda / r) ||B||_1)
inline double joint_objective(const JointDictionary& dict,
                              const SeenDataset& data,
                              const UnseenPrototypes& protos, const Matrix& a,
                              const Matrix& b, const HyperParams& params) {
  const Index p = data.features.rows();
  const Index q = data.attributes.rows();
  const Index n = data.features.cols();
  const Index m = protos.attributes.cols();
  const Index r = dict.atoms();
  if (dict.dx.rows() != p || dict.dz.rows() != q ||
      protos.attributes.rows() != q)
    throw data_error("joint_objective: dictionary/data row mismatch");
  if (a.rows() != r || a.cols() != n || b.rows() != r || b.cols() != m)
    throw data_error("joint_objective: code shape mismatch");

  const double np = static_cast<double>(n) * static_cast<double>(p);
  const double nq = static_cast<double>(n) * static_cast<double>(q);
  const double mq = static_cast<double>(m) * static_cast<double>(q);
  const double lr = params.lambda / static_cast<double>(r);

  double value =
      ((data.features - dict.dx * a).squaredNorm() +
       static_cast<double>(p) * lr * a.cwiseAbs().sum()) /
          np +
      (data.attributes - dict.dz * a).squaredNorm() / nq;
  if (m > 0)
    value += ((protos.attributes - dict.dz * b).squaredNorm() +
              static_cast<double>(q) * lr * b.cwiseAbs().sum()) /
             mq;
  return value;
}

/// Objective of the Dz/B subproblem at fixed codes A.
inline double dz_subproblem_objective(const Matrix& dz, const SeenDataset& data,
                                      const UnseenPrototypes& protos,
                                      const Matrix& a, const Matrix& b,
                                      const HyperParams& params) {
  const Index q = data.attributes.rows();
  const Index n = data.attributes.cols();
  const Index m = protos.attributes.cols();
  const double lr = params.lambda / static_cast<double>(dz.cols());
  double value = (data.attributes - dz * a).squaredNorm() /
                 (static_cast<double>(n) * static_cast<double>(q));
  if (m > 0)
    value += ((protos.attributes - dz * b).squaredNorm() +
              static_cast<double>(q) * lr * b.cwiseAbs().sum()) /
             (static_cast<double>(m) * static_cast<double>(q));
  return value;
}

/// Ridge-stabilized least-squares fit of `targets` against `codes`:
/// targets * codes' * (codes codes' + eps I)^{-1},
/// eps = 1e-8 * trace(codes codes') / r.
inline Matrix regress_dictionary(const Matrix& targets, const Matrix& codes) {
  const Index r = codes.rows();
  Matrix gram = codes * codes.transpose();
  const double eps = 1e-8 * gram.trace() / static_cast<double>(r);
  gram.diagonal().array() += eps;
  Eigen::MatrixXd rhs = codes * targets.transpose();
  Eigen::MatrixXd solved = Eigen::MatrixXd(gram).ldlt().solve(rhs);
  return Matrix(solved.transpose());
}

namespace detail {

constexpr int kRegressionSteps = 30;

// Feasible dictionary fit of `targets` against fixed `codes`. The ridge
// closed form overshoots badly when the codes are ill conditioned: its
// columns can need norms far above 1 and the projection then destroys the
// fit. Accept the projected closed form only when it beats `current`;
// otherwise refine `current` by projected gradient descent, which cannot
// increase the residual.
inline Matrix constrained_regression(const Matrix& targets,
                                     const Matrix& codes,
                                     const Matrix& current) {
  Matrix candidate = project_columns(regress_dictionary(targets, codes));
  const double f_candidate = (targets - candidate * codes).squaredNorm();
  double f_best = (targets - current * codes).squaredNorm();
  if (f_candidate <= f_best) return candidate;

  Matrix gram = codes * codes.transpose();
  const double lip = 2.0 * spectral_norm(gram) * (1.0 + 1e-7);
  if (lip <= 0.0) return current;
  Matrix d = current;
  for (int it = 0; it < kRegressionSteps; ++it) {
    Matrix grad = 2.0 * ((d * codes - targets) * codes.transpose());
    d = project_columns(d - grad / lip);
  }
  const double f_refined = (targets - d * codes).squaredNorm();
  return f_refined <= f_best ? d : current;
}

}  // namespace detail

struct DzUpdate {
  Matrix dz;
  Matrix codes_a;  // sparse codes of X against Dx
  Matrix codes_b;  // sparse codes of Z' against the updated Dz
};

struct DxUpdate {
  Matrix dx;
  Matrix codes_a;  // sparse codes of Z against Dz
};

namespace detail {

constexpr int kDzSweeps = 5;

inline bool all_zero(const Matrix& m) { return m.isZero(0.0); }

}  // namespace detail

/// Dz update at fixed Dx: sparse-code X against Dx, then alternate LASSO
/// updates of B with projected gradient steps on Dz for a fixed number of
/// sweeps. With no prototypes the Dz fit reduces to a closed-form regression.
/// `a_init`/`b_init` warm-start the inner solves when provided.
inline DzUpdate update_dz(const JointDictionary& dict, const SeenDataset& data,
                          const UnseenPrototypes& protos,
                          const HyperParams& params,
                          const Matrix* a_init = nullptr,
                          const Matrix* b_init = nullptr) {
  const Index p = data.features.rows();
  const Index q = data.attributes.rows();
  const Index n = data.features.cols();
  const Index m = protos.attributes.cols();
  const Index r = dict.atoms();
  const double lr = params.lambda / static_cast<double>(r);
  const BatchOpts opts{params.fista_max_iter, params.fista_tol};

  DzUpdate out;
  out.codes_a = batch_sparse_code(dict.dx, data.features,
                                  1.0 / static_cast<double>(p), lr, opts,
                                  a_init);

  if (m == 0) {
    if (detail::all_zero(out.codes_a))
      throw numeric_error("dead codes: lambda too large");
    out.dz = detail::constrained_regression(data.attributes, out.codes_a,
                                            dict.dz);
    out.codes_b = Matrix(r, 0);
    return out;
  }

  const double mq = static_cast<double>(m) * static_cast<double>(q);
  const double nq = static_cast<double>(n) * static_cast<double>(q);

  Matrix dz = dict.dz;
  Matrix b = b_init ? *b_init : Matrix(Matrix::Zero(r, m));
  for (int sweep = 0; sweep < detail::kDzSweeps; ++sweep) {
    b = batch_sparse_code(dz, protos.attributes,
                          1.0 / static_cast<double>(q), lr, opts, &b);

    // Hessian of the smooth Dz fit acts by right-multiplication with this
    // PSD matrix; its top eigenvalue is the gradient's Lipschitz constant.
    Matrix curvature = (2.0 / mq) * (b * b.transpose()) +
                       (2.0 / nq) * (out.codes_a * out.codes_a.transpose());
    const double lip = spectral_norm(curvature) * (1.0 + 1e-7);
    if (lip <= 0.0) break;  // nothing drives the fit; gradient is zero too

    Matrix grad = (2.0 / mq) * ((dz * b - protos.attributes) * b.transpose()) +
                  (2.0 / nq) *
                      ((dz * out.codes_a - data.attributes) *
                       out.codes_a.transpose());
    dz = project_columns(dz - grad / lip);
  }

  out.dz = std::move(dz);
  out.codes_b = std::move(b);
  return out;
}

/// Dx update at fixed Dz: sparse-code Z against Dz, then fit Dx by the
/// closed-form regression and project back onto the column constraint.
inline DxUpdate update_dx(const JointDictionary& dict, const SeenDataset& data,
                          const HyperParams& params,
                          const Matrix* a_init = nullptr) {
  const Index q = data.attributes.rows();
  const double lr = params.lambda / static_cast<double>(dict.atoms());
  const BatchOpts opts{params.fista_max_iter, params.fista_tol};

  DxUpdate out;
  out.codes_a = batch_sparse_code(dict.dz, data.attributes,
                                  1.0 / static_cast<double>(q), lr, opts,
                                  a_init);
  if (detail::all_zero(out.codes_a))
    throw numeric_error("dead codes: lambda too large");
  out.dx =
      detail::constrained_regression(data.features, out.codes_a, dict.dx);
  return out;
}

namespace detail {

// An atom no code touches contributes nothing; reseed it with the worst
// reconstructed sample so later rounds can use it.
inline void revive_dead_atoms(Matrix& dx, const Matrix& a,
                              const Matrix& features) {
  const Index r = dx.cols();
  const Index n = features.cols();
  std::vector<Index> dead;
  for (Index i = 0; i < r; ++i)
    if (a.row(i).isZero(0.0)) dead.push_back(i);
  if (dead.empty()) return;

  Vector residual(n);
  Matrix recon = dx * a;
  for (Index j = 0; j < n; ++j)
    residual[j] = (features.col(j) - recon.col(j)).norm();
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return residual[x] > residual[y]; });

  size_t next = 0;
  for (Index atom : dead) {
    while (next < order.size() &&
           features.col(order[next]).norm() == 0.0)
      ++next;
    if (next >= order.size()) break;
    dx.col(atom) = features.col(order[next]) / features.col(order[next]).norm();
    ++next;
  }
}

}  // namespace detail

/// Alternating training of the coupled pair with guarded acceptance: every
/// round proposes an updated state, and the accepted model only moves when
/// the joint objective does not increase. The trace records the accepted
/// value per round (entry 0 is the zero-code value at initialization), so it
/// is non-increasing by construction while the proposal chain keeps
/// exploring.
inline std::pair<JointDictionary, TrainReport> train(
    const SeenDataset& data, const UnseenPrototypes& protos,
    const HyperParams& params) {
  validate(data);
  validate(protos);
  validate_disjoint(data, protos);
  const Index n = data.features.cols();
  const Index m = protos.attributes.cols();
  if (n < 1) throw data_error("train: no seen samples");
  if (m < 1) throw data_error("train: no unseen prototypes");

  JointDictionary dict =
      init_dictionaries(data.features.rows(), data.attributes.rows(), params);

  TrainReport report;
  Matrix a = Matrix::Zero(dict.atoms(), n);
  Matrix b = Matrix::Zero(dict.atoms(), m);

  JointDictionary best_dict = dict;
  Matrix best_a = a;
  Matrix best_b = b;
  double best_objective = joint_objective(dict, data, protos, a, b, params);
  report.objective_trace.push_back(best_objective);

  const BatchOpts opts{params.fista_max_iter, params.fista_tol};
  const double lr = params.lambda / static_cast<double>(dict.atoms());
  for (int round = 0; round < params.outer_iters; ++round) {
    DzUpdate dz_step = update_dz(dict, data, protos, params, &a, &b);
    dict.dz = std::move(dz_step.dz);
    a = std::move(dz_step.codes_a);
    b = std::move(dz_step.codes_b);

    DxUpdate dx_step = update_dx(dict, data, params, &a);
    dict.dx = std::move(dx_step.dx);
    a = std::move(dx_step.codes_a);

    detail::revive_dead_atoms(dict.dx, a, data.features);

    // re-synchronize the shared codes against the updated visual dictionary;
    // these are the codes prediction will compute at test time
    a = batch_sparse_code(dict.dx, data.features,
                          1.0 / static_cast<double>(data.features.rows()), lr,
                          opts, &a);

    const double objective = joint_objective(dict, data, protos, a, b, params);
    if (!std::isfinite(objective)) throw numeric_error("divergence");
    if (objective <= best_objective) {
      best_objective = objective;
      best_dict = dict;
      best_a = a;
      best_b = b;
    }
    report.objective_trace.push_back(best_objective);
  }

  report.codes_a = std::move(best_a);
  report.codes_b = std::move(best_b);
  return {std::move(best_dict), std::move(report)};
}

}  // namespace jdzsl
