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

#include <jdzsl/matrix.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace jdzsl {

/// Scalar proximal map of tau*|.|: minimizes (1/2)(u - v)^2 + tau*|u|.
inline double soft_threshold(double v, double tau) {
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return 0.0;
}

/// Largest singular value estimated by power iteration on the Gram operator,
/// with a Rayleigh-quotient stopping rule on the dominant eigenvalue.
inline double spectral_norm(const Matrix& m, int max_iter = 500,
                            double tol = 1e-10) {
  if (m.size() == 0) return 0.0;
  if (m.isZero(0.0)) return 0.0;

  // Fixed pseudo-random start; a deterministic constant vector risks being
  // orthogonal to the dominant singular vector on structured inputs.
  std::mt19937 rng(0x9e3779b9u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector v(m.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = unif(rng);
  v /= v.norm();

  double lambda = 0.0;  // sigma_max^2 estimate
  Vector mv(m.rows());
  Vector gv(m.cols());
  for (int it = 0; it < max_iter; ++it) {
    mv.noalias() = m * v;
    const double next = mv.squaredNorm();  // Rayleigh quotient v'G v, v unit
    gv.noalias() = m.transpose() * mv;
    const double gn = gv.norm();
    if (gn == 0.0) {
      // v landed in the null space; reseed and keep iterating.
      for (Index i = 0; i < v.size(); ++i) v[i] = unif(rng);
      v /= v.norm();
      continue;
    }
    v = gv / gn;
    if (it > 0 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

/// Step size 1/L for the gradient of data_weight*||t - D a||^2, where
/// L = 2*data_weight*sigma_max(D)^2.
inline double lipschitz_step(const Matrix& design, double data_weight) {
  if (design.size() == 0) throw data_error("lipschitz_step: empty design");
  if (data_weight <= 0.0)
    throw data_error("lipschitz_step: data_weight must be positive");
  require_finite(design, "lipschitz_step: design");
  const double sigma = spectral_norm(design);
  if (sigma <= 0.0) throw numeric_error("degenerate design");
  return 1.0 / (2.0 * data_weight * sigma * sigma);
}

/// One l1-regularized least-squares instance:
///   minimize data_weight*||target - design*a||^2 + l1_weight*||a||_1
struct LassoProblem {
  Matrix design;       // d x r
  Vector target;       // d
  double data_weight;  // > 0
  double l1_weight;    // >= 0
};

struct SolveReport {
  Vector solution;
  std::vector<double> objective_trace;  // accepted objective per iteration
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Shared per-design state for FISTA solves: Gram matrix and step size are
// identical for every column of a batch.
struct LassoPlan {
  Matrix gram;  // D'D, r x r
  double step;  // 1/L
  double data_weight;
  double l1_weight;

  LassoPlan(const Matrix& design, double w, double l1)
      : gram(design.transpose() * design),
        step(lipschitz_step(design, w)),
        data_weight(w),
        l1_weight(l1) {}
};

// Objective via the Gram form; reuses gram*a for both gradient and value.
inline double lasso_objective(const LassoPlan& plan, const Vector& a,
                              const Vector& lin, double target_sq,
                              Vector& gram_a) {
  gram_a.noalias() = plan.gram * a;
  const double quad = a.dot(gram_a) - 2.0 * a.dot(lin) + target_sq;
  return plan.data_weight * quad + plan.l1_weight * a.lpNorm<1>();
}

// Monotone FISTA: the accepted iterate never has a larger objective than its
// predecessor, so the trace is non-increasing by construction. Momentum is
// driven by the raw candidate even when it is rejected.
inline SolveReport fista_core(const LassoPlan& plan, const Vector& lin,
                              double target_sq, Vector init, int max_iter,
                              double tol) {
  const double step = plan.step;
  const double shrink = step * plan.l1_weight;

  SolveReport report;
  Vector gram_a(init.size());
  Vector a_prev = init;
  Vector y = init;
  Vector z(init.size());
  Vector grad(init.size());

  double f_prev = lasso_objective(plan, a_prev, lin, target_sq, gram_a);
  report.objective_trace.push_back(f_prev);

  Vector a = a_prev;
  double t = 1.0;
  for (int k = 1; k <= max_iter; ++k) {
    grad.noalias() = plan.gram * y;
    grad = 2.0 * plan.data_weight * (grad - lin);
    z = y - step * grad;
    for (Index i = 0; i < z.size(); ++i) z[i] = soft_threshold(z[i], shrink);

    const double fz = lasso_objective(plan, z, lin, target_sq, gram_a);
    const bool accepted = fz <= f_prev;
    double f;
    double t_next;
    if (accepted) {
      a = z;
      f = fz;
      t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = a + (t / t_next) * (z - a) + ((t - 1.0) / t_next) * (a - a_prev);
    } else {
      // function-value restart: drop momentum, take a plain proximal step
      // from the best iterate next time around
      a = a_prev;
      f = f_prev;
      t_next = 1.0;
      y = a;
    }

    report.objective_trace.push_back(f);
    report.iterations = k;
    if (accepted &&
        std::abs(f_prev - f) < tol * std::max(std::abs(f_prev), 1e-12)) {
      report.converged = true;
      a_prev = a;
      break;
    }
    a_prev = a;
    f_prev = f;
    t = t_next;
  }

  report.solution = std::move(a_prev);
  return report;
}

// Zero design columns carry no information; their coefficients are pinned to
// zero (the gradient there vanishes, so they stay zero once cleared).
inline void clear_dead_coefficients(const Matrix& design, Vector& init) {
  for (Index j = 0; j < design.cols(); ++j) {
    if (design.col(j).norm() == 0.0) init[j] = 0.0;
  }
}

}  // namespace detail

/// Solves `problem` by monotone FISTA with a fixed 1/L step.
/// Converged means the relative objective change of an accepted step fell
/// below `tol` before `max_iter`.
inline SolveReport fista_lasso(const LassoProblem& problem, const Vector& init,
                               int max_iter = 500, double tol = 1e-7) {
  if (problem.design.rows() != problem.target.size())
    throw data_error("fista_lasso: design rows (" +
                     std::to_string(problem.design.rows()) +
                     ") != target length (" +
                     std::to_string(problem.target.size()) + ")");
  if (init.size() != problem.design.cols())
    throw data_error("fista_lasso: init length (" +
                     std::to_string(init.size()) + ") != design cols (" +
                     std::to_string(problem.design.cols()) + ")");
  if (problem.data_weight <= 0.0)
    throw data_error("fista_lasso: data_weight must be positive");
  if (problem.l1_weight < 0.0)
    throw data_error("fista_lasso: l1_weight must be nonnegative");
  require_finite(problem.design, "fista_lasso: design");
  require_finite(problem.target, "fista_lasso: target");
  require_finite(init, "fista_lasso: init");

  detail::LassoPlan plan(problem.design, problem.data_weight,
                         problem.l1_weight);
  Vector lin = problem.design.transpose() * problem.target;
  Vector start = init;
  detail::clear_dead_coefficients(problem.design, start);
  return detail::fista_core(plan, lin, problem.target.squaredNorm(),
                            std::move(start), max_iter, tol);
}

struct BatchOpts {
  int max_iter = 500;
  double tol = 1e-7;
};

/// Column j of the result is fista_lasso applied to column j of `targets`
/// (identical arithmetic; columns are independent). `init`, when given, must
/// match the output shape and warm-starts each column.
inline Matrix batch_sparse_code(const Matrix& design, const Matrix& targets,
                                double data_weight, double l1_weight,
                                const BatchOpts& opts = {},
                                const Matrix* init = nullptr) {
  if (design.rows() != targets.rows())
    throw data_error("batch_sparse_code: design rows (" +
                     std::to_string(design.rows()) + ") != target rows (" +
                     std::to_string(targets.rows()) + ")");
  if (init && (init->rows() != design.cols() || init->cols() != targets.cols()))
    throw data_error("batch_sparse_code: init shape mismatch");
  require_finite(design, "batch_sparse_code: design");
  require_finite(targets, "batch_sparse_code: targets");

  detail::LassoPlan plan(design, data_weight, l1_weight);
  Matrix codes(design.cols(), targets.cols());
  Vector lin(design.cols());
  Vector start = Vector::Zero(design.cols());
  for (Index j = 0; j < targets.cols(); ++j) {
    Vector target = targets.col(j);
    lin.noalias() = design.transpose() * target;
    if (init) start = init->col(j);
    detail::clear_dead_coefficients(design, start);
    SolveReport report = detail::fista_core(
        plan, lin, target.squaredNorm(), start, opts.max_iter, opts.tol);
    codes.col(j) = report.solution;
    if (!init) start.setZero();
  }
  return codes;
}

}  // namespace jdzsl
