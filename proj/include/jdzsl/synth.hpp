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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace jdzsl {

/// Generator parameters for desk-scale synthetic zero-shot datasets drawn
/// from ground-truth coupled dictionaries.
struct SynthSpec {
  Index p = 32;         // visual feature dimension
  Index q = 16;         // attribute dimension
  Index r_true = 64;    // generating dictionary atoms
  Index k_true = 4;     // true code sparsity
  Index n_seen = 400;   // seen samples
  Index m_unseen = 8;   // unseen classes / prototypes
  double noise_sigma = 0.0;
  double shift_sigma = 0.0;  // class-conditional feature-space shift magnitude
  std::uint64_t seed = 1;
};

inline void validate(const SynthSpec& spec) {
  if (spec.p < 1 || spec.q < 1 || spec.r_true < 1 || spec.n_seen < 1 ||
      spec.m_unseen < 1)
    throw data_error("synth spec: all counts must be at least 1");
  if (spec.k_true < 0 || spec.k_true > spec.r_true)
    throw data_error("synth spec: k_true must lie in [0, r_true]");
  if (spec.noise_sigma < 0.0 || spec.shift_sigma < 0.0)
    throw data_error("synth spec: sigmas must be nonnegative");
}

struct SynthData {
  SeenDataset seen;
  UnseenPrototypes protos;
  Matrix test_features;  // p x l, 8 test samples per unseen class
  std::vector<int> test_truth;

  // generator ground truth, kept for diagnostics and oracle tests
  Matrix dx_true;
  Matrix dz_true;
  Matrix test_codes;  // r_true x l
};

namespace detail {

inline std::vector<Index> sample_support(std::mt19937_64& rng, Index r,
                                         Index k) {
  std::vector<Index> idx(static_cast<size_t>(r));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, r - 1);
    std::swap(idx[static_cast<size_t>(i)],
              idx[static_cast<size_t>(pick(rng))]);
  }
  idx.resize(static_cast<size_t>(k));
  return idx;
}

inline Vector sparse_code(std::mt19937_64& rng, Index r, Index k) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector code = Vector::Zero(r);
  for (Index i : sample_support(rng, r, k)) code[i] = normal(rng);
  return code;
}

inline Matrix gaussian_dictionary(std::mt19937_64& rng, Index rows,
                                  Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  normalize_columns(m);
  return m;
}

constexpr double kCodeJitterSigma = 0.1;
constexpr Index kTestPerClass = 8;

}  // namespace detail

/// Draws a synthetic zero-shot problem: coupled ground-truth dictionaries,
/// per-class k-sparse codes, seen samples with small on-support code jitter,
/// held-out prototype classes, and test features with optional additive noise
/// and a per-class shift of exactly `shift_sigma` in feature space.
inline SynthData gen_synthetic(const SynthSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SynthData out;
  out.dx_true = detail::gaussian_dictionary(rng, spec.p, spec.r_true);
  out.dz_true = detail::gaussian_dictionary(rng, spec.q, spec.r_true);

  const Index seen_classes = std::max<Index>(2, 2 * spec.m_unseen);
  std::vector<Vector> class_codes;
  for (Index c = 0; c < seen_classes; ++c)
    class_codes.push_back(detail::sparse_code(rng, spec.r_true, spec.k_true));

  out.seen.features.resize(spec.p, spec.n_seen);
  out.seen.attributes.resize(spec.q, spec.n_seen);
  out.seen.labels.resize(static_cast<size_t>(spec.n_seen));
  std::vector<Vector> class_attributes;
  for (Index c = 0; c < seen_classes; ++c)
    class_attributes.push_back(out.dz_true * class_codes[static_cast<size_t>(c)]);

  for (Index i = 0; i < spec.n_seen; ++i) {
    const Index cls = i % seen_classes;
    Vector code = class_codes[static_cast<size_t>(cls)];
    for (Index j = 0; j < spec.r_true; ++j)
      if (code[j] != 0.0) code[j] += detail::kCodeJitterSigma * normal(rng);
    out.seen.features.col(i) = out.dx_true * code;
    out.seen.attributes.col(i) = class_attributes[static_cast<size_t>(cls)];
    out.seen.labels[static_cast<size_t>(i)] = static_cast<int>(cls);
  }

  out.protos.attributes.resize(spec.q, spec.m_unseen);
  out.protos.labels.resize(static_cast<size_t>(spec.m_unseen));
  std::vector<Vector> proto_codes;
  for (Index m = 0; m < spec.m_unseen; ++m) {
    proto_codes.push_back(detail::sparse_code(rng, spec.r_true, spec.k_true));
    out.protos.attributes.col(m) = out.dz_true * proto_codes.back();
    out.protos.labels[static_cast<size_t>(m)] =
        static_cast<int>(seen_classes + m);
  }

  std::vector<Vector> class_shifts;
  for (Index m = 0; m < spec.m_unseen; ++m) {
    Vector direction(spec.p);
    for (Index i = 0; i < spec.p; ++i) direction[i] = normal(rng);
    const double norm = direction.norm();
    class_shifts.push_back(norm > 0.0
                               ? Vector(spec.shift_sigma * direction / norm)
                               : Vector(Vector::Zero(spec.p)));
  }

  const Index l = spec.m_unseen * detail::kTestPerClass;
  out.test_features.resize(spec.p, l);
  out.test_codes.resize(spec.r_true, l);
  out.test_truth.resize(static_cast<size_t>(l));
  for (Index t = 0; t < l; ++t) {
    const Index cls = t % spec.m_unseen;
    Vector code = proto_codes[static_cast<size_t>(cls)];
    for (Index j = 0; j < spec.r_true; ++j)
      if (code[j] != 0.0) code[j] += detail::kCodeJitterSigma * normal(rng);
    Vector x = out.dx_true * code;
    if (spec.noise_sigma > 0.0)
      for (Index i = 0; i < spec.p; ++i) x[i] += spec.noise_sigma * normal(rng);
    x += class_shifts[static_cast<size_t>(cls)];
    out.test_features.col(t) = x;
    out.test_codes.col(t) = code;
    out.test_truth[static_cast<size_t>(t)] =
        out.protos.labels[static_cast<size_t>(cls)];
  }

  return out;
}

struct Lemma1Row {
  Index p = 0;
  double mean_error = 0.0;
};

struct Lemma1Result {
  std::vector<Lemma1Row> rows;
  double fitted_constant = 0.0;  // fit of error against sqrt(k log(r) / p)
};

/// Sparse-recovery scaling study: for each design height p, draws Gaussian
/// designs with unit-norm columns and k-sparse ground truths, solves the
/// LASSO, and records the mean l2 recovery error. The l1 weight follows the
/// usual noise calibration sigma * sqrt(2 log r) on the (1/2)||.||^2 scale.
inline Lemma1Result lemma1_study(const std::vector<Index>& p_list, int trials,
                                 const SynthSpec& tmpl) {
  if (trials < 1) throw data_error("lemma1_study: trials must be at least 1");
  for (size_t i = 1; i < p_list.size(); ++i)
    if (p_list[i] <= p_list[i - 1])
      throw data_error("lemma1_study: p_list must be strictly increasing");

  const Index r = tmpl.r_true;
  const Index k = tmpl.k_true;
  const double sigma = tmpl.noise_sigma;
  const double l1 =
      std::max(sigma * std::sqrt(2.0 * std::log(static_cast<double>(r))),
               1e-4);

  std::mt19937_64 rng(tmpl.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> magnitude(0.5, 1.5);
  std::uniform_int_distribution<int> coin(0, 1);

  Lemma1Result result;
  for (Index p : p_list) {
    double total = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      Matrix design = detail::gaussian_dictionary(rng, p, r);
      Vector truth = Vector::Zero(r);
      for (Index j : detail::sample_support(rng, r, k))
        truth[j] = (coin(rng) ? 1.0 : -1.0) * magnitude(rng);
      Vector x = design * truth;
      if (sigma > 0.0)
        for (Index i = 0; i < p; ++i) x[i] += sigma * normal(rng);

      SolveReport report = fista_lasso({design, x, 0.5, l1}, Vector::Zero(r),
                                       2000, 1e-12);
      total += (report.solution - truth).norm();
    }
    result.rows.push_back({p, total / trials});
  }

  // least-squares fit of mean error against the predicted scaling term
  double num = 0.0, den = 0.0;
  for (const auto& row : result.rows) {
    const double phi = std::sqrt(static_cast<double>(k) *
                                 std::log(static_cast<double>(r)) /
                                 static_cast<double>(row.p));
    num += row.mean_error * phi;
    den += phi * phi;
  }
  result.fitted_constant = den > 0.0 ? num / den : 0.0;
  return result;
}

}  // namespace jdzsl
