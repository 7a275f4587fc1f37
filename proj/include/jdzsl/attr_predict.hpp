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
#include <jdzsl/joint_dict.hpp>
#include <jdzsl/sparse_opt.hpp>

#include <cmath>
#include <vector>

namespace jdzsl {

/// Student-t soft assignment of a predicted attribute vector to the unseen
/// prototypes, plus its Shannon entropy (natural log, 0 log 0 = 0).
struct SoftAssignment {
  Vector probs;          // length M, nonnegative, sums to 1
  double entropy = 0.0;  // in [0, log M]
};

enum class PredictMode { AAg, AAw };

struct PredictionResult {
  Matrix codes;                            // r x l
  Matrix predicted_attributes;             // q x l, equals Dz * codes
  std::vector<SoftAssignment> assignments; // one per column
  std::vector<int> labels;                 // filled by the assignment stage
};

/// p_m proportional to (1 + ||zhat - z'_m||^2 / rho)^{-(rho+1)/2}, evaluated
/// in the log domain so extreme distances cannot underflow the denominator.
inline SoftAssignment soft_assign(const Vector& zhat,
                                  const UnseenPrototypes& protos, double rho) {
  const Index m = protos.attributes.cols();
  if (m < 1) throw data_error("soft_assign: no prototypes");
  if (rho <= 0.0) throw data_error("soft_assign: rho must be positive");
  if (zhat.size() != protos.attributes.rows())
    throw data_error("soft_assign: attribute dimension mismatch");

  Vector logits(m);
  for (Index j = 0; j < m; ++j) {
    const double d2 = (zhat - protos.attributes.col(j)).squaredNorm();
    logits[j] = -0.5 * (rho + 1.0) * std::log1p(d2 / rho);
  }
  const double top = logits.maxCoeff();
  Vector scaled = (logits.array() - top).exp();
  const double total = scaled.sum();

  SoftAssignment out;
  out.probs = scaled / total;
  const double log_total = std::log(total);
  for (Index j = 0; j < m; ++j) {
    const double p = out.probs[j];
    if (p > 0.0) out.entropy -= p * (logits[j] - top - log_total);
  }
  out.entropy = std::max(0.0, out.entropy);
  return out;
}

/// Attribute-agnostic sparse code of one feature vector:
///   argmin_a (1/p) ||x - Dx a||^2 + (lambda/r) ||a||_1
inline Vector predict_aag(const JointDictionary& dict, const Vector& x,
                          const HyperParams& params) {
  const Index p = dict.dx.rows();
  if (x.size() != p) throw data_error("predict_aag: feature length mismatch");
  LassoProblem problem{dict.dx, x, 1.0 / static_cast<double>(p),
                       params.lambda / static_cast<double>(dict.atoms())};
  return fista_lasso(problem, Vector::Zero(dict.atoms()),
                     params.fista_max_iter, params.fista_tol)
      .solution;
}

/// Smooth part of the attribute-aware objective:
///   g(a) = (1/p) ||x - Dx a||^2 - gamma * sum_m p_m(a) log p_m(a)
inline double aaw_smooth_objective(const Vector& a, const Vector& x,
                                   const JointDictionary& dict,
                                   const UnseenPrototypes& protos,
                                   const HyperParams& params) {
  const double p = static_cast<double>(dict.dx.rows());
  double value = (x - dict.dx * a).squaredNorm() / p;
  if (params.gamma != 0.0) {
    SoftAssignment assign =
        soft_assign(Vector(dict.dz * a), protos, params.rho);
    value += params.gamma * assign.entropy;
  }
  return value;
}

/// Full attribute-aware objective g(a) + (lambda/r) ||a||_1.
inline double aaw_objective(const Vector& a, const Vector& x,
                            const JointDictionary& dict,
                            const UnseenPrototypes& protos,
                            const HyperParams& params) {
  return aaw_smooth_objective(a, x, dict, protos, params) +
         params.lambda / static_cast<double>(dict.atoms()) * a.lpNorm<1>();
}

/// Analytic gradient of the smooth part. The data term differentiates to
/// (2/p) Dx'(Dx a - x); the entropy term is assembled from the t-kernel
/// values l_m and their derivatives through the quotient rule on
/// p_m = l_m / sum_k l_k.
inline Vector grad_g(const Vector& a, const Vector& x,
                     const JointDictionary& dict,
                     const UnseenPrototypes& protos,
                     const HyperParams& params) {
  const double p = static_cast<double>(dict.dx.rows());
  Vector grad = (2.0 / p) * (dict.dx.transpose() * (dict.dx * a - x));
  if (params.gamma == 0.0) return grad;

  const Index m = protos.attributes.cols();
  if (m < 1) throw data_error("grad_g: no prototypes");
  const double rho = params.rho;

  Vector za = dict.dz * a;
  Matrix residuals(dict.dz.rows(), m);  // Dz a - z'_m per prototype
  Vector kernel(m);                     // l_m
  Vector kernel_slope(m);               // scalar factor of dl_m/da
  for (Index j = 0; j < m; ++j) {
    residuals.col(j) = za - protos.attributes.col(j);
    const double d2 = residuals.col(j).squaredNorm();
    kernel[j] = std::pow(1.0 + d2 / rho, -0.5 * (rho + 1.0));
    kernel_slope[j] =
        -((rho + 1.0) / rho) * std::pow(1.0 + d2 / rho, -0.5 * (rho + 3.0));
  }
  const double total = kernel.sum();

  // dH/da = -sum_m (1 + log p_m) dp_m/da with dp_m from the quotient rule.
  // Terms with underflowed p_m contribute nothing in the limit.
  Vector weighted_residual = Vector::Zero(dict.dz.rows());  // sum (1+log p) c R
  Vector slope_residual = Vector::Zero(dict.dz.rows());     // sum c R
  double weighted_kernel = 0.0;                             // sum (1+log p) l
  for (Index j = 0; j < m; ++j) {
    slope_residual += kernel_slope[j] * residuals.col(j);
    const double prob = kernel[j] / total;
    if (prob <= 0.0) continue;
    const double w = 1.0 + std::log(prob);
    weighted_residual += w * kernel_slope[j] * residuals.col(j);
    weighted_kernel += w * kernel[j];
  }
  Vector entropy_grad =
      -(dict.dz.transpose() * weighted_residual) / total +
      (weighted_kernel / (total * total)) *
          (dict.dz.transpose() * slope_residual);
  return grad + params.gamma * entropy_grad;
}

/// Attribute-aware prediction: start from the attribute-agnostic solution
/// and iterate proximal steps a <- shrink(a - t grad_g(a), t lambda / r).
/// The step defaults to the data-term Lipschitz step and is halved once if
/// the first iteration increases the objective. Returns the iterate with the
/// lowest objective seen (the problem is nonconvex).
inline std::pair<Vector, SolveReport> predict_aaw(
    const JointDictionary& dict, const Vector& x,
    const UnseenPrototypes& protos, const HyperParams& params) {
  const Index p = dict.dx.rows();
  const double shrink_weight =
      params.lambda / static_cast<double>(dict.atoms());

  Vector a = predict_aag(dict, x, params);
  double step = params.aaw_step > 0.0
                    ? params.aaw_step
                    : lipschitz_step(dict.dx, 1.0 / static_cast<double>(p));

  SolveReport report;
  double f = aaw_objective(a, x, dict, protos, params);
  report.objective_trace.push_back(f);
  Vector best = a;
  double f_best = f;

  auto prox_step = [&](const Vector& from, double t) {
    Vector g = grad_g(from, x, dict, protos, params);
    if (!g.allFinite()) throw numeric_error("aaw divergence: reduce step");
    Vector next = from - t * g;
    for (Index i = 0; i < next.size(); ++i)
      next[i] = soft_threshold(next[i], t * shrink_weight);
    return next;
  };

  for (int k = 1; k <= params.aaw_max_iter; ++k) {
    Vector next = prox_step(a, step);
    double f_next = aaw_objective(next, x, dict, protos, params);
    if (k == 1 && f_next > f) {
      step *= 0.5;  // one-shot safeguard against an overlong first step
      next = prox_step(a, step);
      f_next = aaw_objective(next, x, dict, protos, params);
    }
    if (!std::isfinite(f_next)) throw numeric_error("aaw divergence: reduce step");

    report.objective_trace.push_back(f_next);
    report.iterations = k;
    if (f_next < f_best) {
      f_best = f_next;
      best = next;
    }
    const double move = (next - a).norm();
    const double base = std::max(a.norm(), 1e-12);
    a = std::move(next);
    f = f_next;
    if (move <= params.fista_tol * base) {
      report.converged = true;
      break;
    }
  }

  report.solution = best;
  return {std::move(best), std::move(report)};
}

/// Per-column prediction over a feature batch; attribute estimates are
/// Dz * codes and every column gets a soft assignment.
inline PredictionResult predict_batch(const JointDictionary& dict,
                                      const Matrix& features,
                                      const UnseenPrototypes& protos,
                                      const HyperParams& params,
                                      PredictMode mode) {
  if (features.rows() != dict.dx.rows())
    throw data_error("predict_batch: feature rows (" +
                     std::to_string(features.rows()) +
                     ") != dictionary rows (" +
                     std::to_string(dict.dx.rows()) + ")");
  require_finite(features, "predict_batch: features");

  const Index l = features.cols();
  PredictionResult out;
  out.codes.resize(dict.atoms(), l);
  for (Index j = 0; j < l; ++j) {
    Vector x = features.col(j);
    if (mode == PredictMode::AAg)
      out.codes.col(j) = predict_aag(dict, x, params);
    else
      out.codes.col(j) = predict_aaw(dict, x, protos, params).first;
  }
  out.predicted_attributes = dict.dz * out.codes;
  out.assignments.reserve(static_cast<size_t>(l));
  for (Index j = 0; j < l; ++j)
    out.assignments.push_back(soft_assign(
        Vector(out.predicted_attributes.col(j)), protos, params.rho));
  return out;
}

}  // namespace jdzsl
