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
#include <jdzsl/tsne.hpp>

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

namespace jdzsl {

/// Undirected weighted graph as a dense symmetric matrix. Construction
/// validates symmetry, a zero diagonal, nonnegative weights, and that every
/// node has at least one neighbor.
class Graph {
 public:
  explicit Graph(Matrix weights) : weights_(std::move(weights)) {
    const Index n = weights_.rows();
    if (weights_.cols() != n) throw data_error("graph: weights must be square");
    require_finite(weights_, "graph: weights");
    for (Index i = 0; i < n; ++i) {
      if (weights_(i, i) != 0.0)
        throw data_error("graph: diagonal must be exactly zero");
      bool connected = false;
      for (Index j = 0; j < n; ++j) {
        if (weights_(i, j) < 0.0)
          throw data_error("graph: negative edge weight");
        if (std::abs(weights_(i, j) - weights_(j, i)) > 1e-12)
          throw data_error("graph: weights must be symmetric");
        if (i != j && weights_(i, j) > 0.0) connected = true;
      }
      if (!connected)
        throw data_error("graph: isolated node " + std::to_string(i));
    }
  }

  Index size() const { return weights_.rows(); }
  const Matrix& weights() const { return weights_; }

 private:
  Matrix weights_;
};

struct LabelDistribution {
  Matrix scores;                 // n x C
  std::vector<int> hard_labels;  // row argmax, ties to the lowest column
};

/// Euclidean nearest prototype per column; ties go to the lowest prototype
/// index. Returns prototype labels.
inline std::vector<int> nn_assign(const Matrix& zhat,
                                  const UnseenPrototypes& protos) {
  const Index m = protos.attributes.cols();
  if (m < 1) throw data_error("nn_assign: no prototypes");
  if (zhat.rows() != protos.attributes.rows())
    throw data_error("nn_assign: attribute dimension mismatch");

  std::vector<int> labels(static_cast<size_t>(zhat.cols()));
  for (Index j = 0; j < zhat.cols(); ++j) {
    Index best = 0;
    double best_d = (zhat.col(j) - protos.attributes.col(0)).squaredNorm();
    for (Index k = 1; k < m; ++k) {
      const double d = (zhat.col(j) - protos.attributes.col(k)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    labels[static_cast<size_t>(j)] = protos.labels[static_cast<size_t>(best)];
  }
  return labels;
}

/// Symmetric kNN graph over the columns of `points` ("or" rule: an edge
/// exists when either endpoint selects the other). Weights are Gaussian,
/// exp(-d^2 / (2 sigma^2)), with sigma the median kNN distance.
inline Graph knn_graph(const Matrix& points, int k) {
  const Index n = points.cols();
  if (k < 1) throw data_error("knn_graph: k must be at least 1");
  if (k >= n)
    throw data_error("knn_graph: k (" + std::to_string(k) +
                     ") must be below the point count (" + std::to_string(n) +
                     ")");
  require_finite(points, "knn_graph: points");

  Matrix dist(n, n);
  for (Index i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double d = (points.col(i) - points.col(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }

  // k nearest per node, distance ties broken by lower index
  std::vector<std::vector<Index>> neighbors(static_cast<size_t>(n));
  std::vector<double> knn_distances;
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> order;
    order.reserve(static_cast<size_t>(n - 1));
    for (Index j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      if (dist(i, a) != dist(i, b)) return dist(i, a) < dist(i, b);
      return a < b;
    });
    order.resize(static_cast<size_t>(k));
    for (Index j : order) knn_distances.push_back(dist(i, j));
    neighbors[static_cast<size_t>(i)] = std::move(order);
  }

  std::sort(knn_distances.begin(), knn_distances.end());
  const size_t count = knn_distances.size();
  double sigma = count % 2 ? knn_distances[count / 2]
                           : 0.5 * (knn_distances[count / 2 - 1] +
                                    knn_distances[count / 2]);
  if (sigma <= 0.0) {
    // duplicates collapsed the median; fall back to the smallest positive
    // kNN distance so surviving edges keep meaningful weights
    sigma = 1.0;
    for (double d : knn_distances)
      if (d > 0.0) {
        sigma = d;
        break;
      }
  }

  Matrix weights = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j : neighbors[static_cast<size_t>(i)]) {
      const double w = std::max(
          std::exp(-dist(i, j) * dist(i, j) / (2.0 * sigma * sigma)), 1e-300);
      weights(i, j) = w;
      weights(j, i) = w;
    }
  return Graph(std::move(weights));
}

/// Label spreading with the symmetric normalized operator:
///   F = (1 - alpha) (I - alpha D^{-1/2} W D^{-1/2})^{-1} Y
/// solved directly. Hard labels are row argmaxes with lowest-index ties.
inline LabelDistribution label_propagate(const Graph& graph, const Matrix& seeds,
                                         double alpha) {
  const Index n = graph.size();
  if (alpha <= 0.0 || alpha >= 1.0)
    throw data_error("label_propagate: alpha must lie in (0, 1)");
  if (seeds.rows() != n)
    throw data_error("label_propagate: seed rows (" +
                     std::to_string(seeds.rows()) + ") != node count (" +
                     std::to_string(n) + ")");
  require_finite(seeds, "label_propagate: seeds");

  Vector inv_sqrt_degree(n);
  for (Index i = 0; i < n; ++i)
    inv_sqrt_degree[i] = 1.0 / std::sqrt(graph.weights().row(i).sum());
  Eigen::MatrixXd normalized =
      inv_sqrt_degree.asDiagonal() * graph.weights() *
      inv_sqrt_degree.asDiagonal();
  Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - alpha * normalized;

  LabelDistribution out;
  out.scores = Matrix((1.0 - alpha) *
                      system.llt().solve(Eigen::MatrixXd(seeds)).eval());
  out.hard_labels.resize(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    for (Index c = 1; c < out.scores.cols(); ++c)
      if (out.scores(i, c) > out.scores(i, best)) best = c;
    out.hard_labels[static_cast<size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

enum class EmbeddingKind {
  Tsne,      // 2-D t-SNE of [Z' | Zhat], then kNN graph in the plane
  Identity,  // kNN graph directly in attribute space
};

struct TaawOptions {
  EmbeddingKind embedding = EmbeddingKind::Tsne;
};

struct TaawResult {
  Matrix embedding;              // coords used for the graph (2 x n for t-SNE)
  std::vector<int> class_ids;    // sorted unseen class ids, score column order
  LabelDistribution distribution;  // over all M + l nodes
  std::vector<int> labels;       // test-node labels, length l
};

/// Transductive assignment: stack prototypes and predictions, embed, build a
/// kNN graph, and propagate the prototype labels. Exposes the propagation
/// scores and embedding; taaw_assign returns just the labels.
inline TaawResult taaw_run(const Matrix& zhat, const UnseenPrototypes& protos,
                           const HyperParams& params,
                           const TaawOptions& options = {}) {
  validate(params);
  const Index m = protos.attributes.cols();
  const Index l = zhat.cols();
  if (m < 1) throw data_error("taaw: no prototypes");
  if (l < 3) throw data_error("taaw: need at least 3 test columns");
  if (zhat.rows() != protos.attributes.rows())
    throw data_error("taaw: attribute dimension mismatch");

  const Index n = m + l;
  Matrix stacked(zhat.rows(), n);
  stacked.leftCols(m) = protos.attributes;
  stacked.rightCols(l) = zhat;

  TaawResult out;
  if (options.embedding == EmbeddingKind::Tsne) {
    const double cap = (static_cast<double>(n) - 1.0) / 3.0;
    double perplexity = std::min(params.tsne_perplexity, cap - 1.0);
    if (perplexity < 1.0) perplexity = 0.75 * cap;
    out.embedding = tsne_embed(stacked, 2, perplexity, params.tsne_iters,
                               params.seed);
  } else {
    out.embedding = stacked;
  }

  // one score column per unseen class, ordered by ascending class id
  std::map<int, Index> column_of;
  for (int cls : protos.labels) column_of.emplace(cls, 0);
  for (auto& [cls, column] : column_of) {
    column = static_cast<Index>(out.class_ids.size());
    out.class_ids.push_back(cls);
  }
  Matrix seeds = Matrix::Zero(n, static_cast<Index>(out.class_ids.size()));
  for (Index i = 0; i < m; ++i)
    seeds(i, column_of.at(protos.labels[static_cast<size_t>(i)])) = 1.0;

  Graph graph = knn_graph(out.embedding, params.knn_k);
  out.distribution = label_propagate(graph, seeds, params.lp_alpha);

  out.labels.resize(static_cast<size_t>(l));
  for (Index t = 0; t < l; ++t)
    out.labels[static_cast<size_t>(t)] =
        out.class_ids[static_cast<size_t>(
            out.distribution.hard_labels[static_cast<size_t>(m + t)])];
  return out;
}

inline std::vector<int> taaw_assign(const Matrix& zhat,
                                    const UnseenPrototypes& protos,
                                    const HyperParams& params,
                                    const TaawOptions& options = {}) {
  return taaw_run(zhat, protos, params, options).labels;
}

}  // namespace jdzsl
