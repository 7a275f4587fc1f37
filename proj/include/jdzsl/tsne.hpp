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
#include <cstdint>
#include <random>

namespace jdzsl {

struct TsneStats {
  double kl_initial = 0.0;
  double kl_final = 0.0;
};

namespace detail {

// Per-point Gaussian bandwidth found by bisection on the precision so the
// conditional distribution hits the target Shannon entropy log(perplexity).
inline void perplexity_row(const Vector& sq_dist, Index self, double target,
                           Vector& row) {
  const Index n = sq_dist.size();
  double beta = 1.0;
  double beta_min = -1.0, beta_max = -1.0;  // negative means unbounded
  constexpr int kBisectSteps = 50;
  constexpr double kEntropyTol = 1e-5;

  for (int step = 0; step < kBisectSteps; ++step) {
    double sum = 0.0, weighted = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == self) {
        row[j] = 0.0;
        continue;
      }
      const double v = std::exp(-beta * sq_dist[j]);
      row[j] = v;
      sum += v;
      weighted += sq_dist[j] * v;
    }
    if (sum <= 0.0) {
      // all mass underflowed; soften and retry
      beta_max = beta;
      beta = beta_min < 0.0 ? beta * 0.5 : 0.5 * (beta + beta_min);
      continue;
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    const double diff = entropy - target;
    if (std::abs(diff) < kEntropyTol) break;
    if (diff > 0.0) {
      beta_min = beta;
      beta = beta_max < 0.0 ? beta * 2.0 : 0.5 * (beta + beta_max);
    } else {
      beta_max = beta;
      beta = beta_min < 0.0 ? beta * 0.5 : 0.5 * (beta + beta_min);
    }
  }
  const double sum = row.sum();
  if (sum > 0.0) row /= sum;
}

inline double tsne_kl(const Matrix& p, const Matrix& q) {
  double kl = 0.0;
  for (Index i = 0; i < p.rows(); ++i)
    for (Index j = 0; j < p.cols(); ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      kl += p(i, j) * std::log(p(i, j) / std::max(q(i, j), 1e-12));
    }
  return kl;
}

// Student-t affinities of the embedding; returns the normalized Q and the
// unnormalized weights needed by the gradient.
inline void tsne_affinities(const Matrix& y, Matrix& weights, Matrix& q) {
  const Index n = y.cols();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    weights(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double w = 1.0 / (1.0 + (y.col(i) - y.col(j)).squaredNorm());
      weights(i, j) = w;
      weights(j, i) = w;
      total += 2.0 * w;
    }
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      q(i, j) = i == j ? 0.0 : std::max(weights(i, j) / total, 1e-12);
}

}  // namespace detail

/// Exact O(n^2) t-SNE. Columns of `points` are the inputs; returns an
/// out_dim x n embedding. Per-point bandwidths are matched to `perplexity`
/// by bisection; optimization is plain gradient descent with momentum 0.5
/// (0.8 after iteration 250), learning rate 200, and 4x early exaggeration
/// for the first 100 iterations. Deterministic for a fixed seed.
inline Matrix tsne_embed(const Matrix& points, Index out_dim,
                         double perplexity, int iters, std::uint64_t seed,
                         TsneStats* stats = nullptr) {
  const Index n = points.cols();
  if (n < 4) throw data_error("tsne_embed: need at least 4 points");
  if (out_dim < 1) throw data_error("tsne_embed: out_dim must be positive");
  if (perplexity <= 0.0 || perplexity >= (static_cast<double>(n) - 1.0) / 3.0)
    throw data_error("tsne_embed: perplexity must lie in (0, (n-1)/3)");
  if (iters < 1) throw data_error("tsne_embed: iters must be positive");
  require_finite(points, "tsne_embed: points");

  // symmetrized input affinities
  Matrix sq_dist(n, n);
  for (Index i = 0; i < n; ++i) {
    sq_dist(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double d = (points.col(i) - points.col(j)).squaredNorm();
      sq_dist(i, j) = d;
      sq_dist(j, i) = d;
    }
  }
  Matrix conditional(n, n);
  Vector row(n);
  const double target = std::log(perplexity);
  for (Index i = 0; i < n; ++i) {
    detail::perplexity_row(Vector(sq_dist.row(i)), i, target, row);
    conditional.row(i) = row;
  }
  Matrix p = (conditional + conditional.transpose()) /
             (2.0 * static_cast<double>(n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) p(i, j) = std::max(p(i, j), 1e-12);

  // small Gaussian start
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix y(out_dim, n);
  for (Index i = 0; i < out_dim; ++i)
    for (Index j = 0; j < n; ++j) y(i, j) = 1e-4 * normal(rng);

  Matrix weights(n, n), q(n, n);
  if (stats) {
    detail::tsne_affinities(y, weights, q);
    stats->kl_initial = detail::tsne_kl(p, q);
  }

  constexpr double kLearningRate = 200.0;
  constexpr int kExaggerationIters = 100;
  constexpr double kExaggeration = 4.0;
  constexpr int kMomentumSwitch = 250;

  Matrix velocity = Matrix::Zero(out_dim, n);
  Matrix gradient(out_dim, n);
  for (int it = 0; it < iters; ++it) {
    detail::tsne_affinities(y, weights, q);
    const double boost = it < kExaggerationIters ? kExaggeration : 1.0;

    gradient.setZero();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double coeff =
            4.0 * (boost * p(i, j) - q(i, j)) * weights(i, j);
        gradient.col(i) += coeff * (y.col(i) - y.col(j));
      }

    const double momentum = it < kMomentumSwitch ? 0.5 : 0.8;
    velocity = momentum * velocity - kLearningRate * gradient;
    y += velocity;
    Vector mean = y.rowwise().mean();
    y.colwise() -= mean;
  }

  if (stats) {
    detail::tsne_affinities(y, weights, q);
    stats->kl_final = detail::tsne_kl(p, q);
  }
  return y;
}

}  // namespace jdzsl
