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

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace jdzsl {

/// Labeled visual/attribute pairs of the seen classes. Attributes are class
/// specific: every sample of a class carries the same attribute column.
struct SeenDataset {
  Matrix features;          // X, p x N
  Matrix attributes;        // Z, q x N
  std::vector<int> labels;  // length N
};

/// Attribute prototypes of classes with no visual training data, one column
/// per class.
struct UnseenPrototypes {
  Matrix attributes;        // Z', q x M
  std::vector<int> labels;  // length M
};

/// Every scalar knob of the pipeline. aaw_step <= 0 selects the data-term
/// Lipschitz step at prediction time.
struct HyperParams {
  double lambda = 0.02;          // sparsity weight
  double gamma = 0.1;            // entropy weight
  double rho = 1.0;              // t-kernel parameter
  int r = 96;                    // dictionary atoms
  int outer_iters = 30;
  int fista_max_iter = 500;
  double fista_tol = 1e-7;
  int aaw_max_iter = 100;
  double aaw_step = 0.0;
  int knn_k = 10;
  double lp_alpha = 0.99;
  double tsne_perplexity = 30.0;
  int tsne_iters = 500;
  std::uint64_t seed = 1;
};

inline void validate(const HyperParams& hp) {
  if (hp.lambda < 0.0) throw data_error("lambda must be nonnegative");
  if (hp.gamma < 0.0) throw data_error("gamma must be nonnegative");
  if (hp.rho <= 0.0) throw data_error("rho must be positive");
  if (hp.r < 1) throw data_error("r must be at least 1");
  if (hp.outer_iters < 0) throw data_error("outer_iters must be nonnegative");
  if (hp.fista_max_iter < 1) throw data_error("fista_max_iter must be at least 1");
  if (hp.fista_tol <= 0.0) throw data_error("fista_tol must be positive");
  if (hp.aaw_max_iter < 1) throw data_error("aaw_max_iter must be at least 1");
  if (hp.knn_k < 1) throw data_error("knn_k must be at least 1");
  if (hp.lp_alpha <= 0.0 || hp.lp_alpha >= 1.0)
    throw data_error("lp_alpha must lie in (0, 1)");
  if (hp.tsne_perplexity <= 0.0)
    throw data_error("tsne_perplexity must be positive");
  if (hp.tsne_iters < 1) throw data_error("tsne_iters must be at least 1");
}

inline void validate(const SeenDataset& data) {
  const Index n = data.features.cols();
  if (data.attributes.cols() != n ||
      static_cast<Index>(data.labels.size()) != n)
    throw data_error("seen dataset: feature columns (" +
                     std::to_string(data.features.cols()) +
                     ") vs attribute columns (" +
                     std::to_string(data.attributes.cols()) + ") vs labels (" +
                     std::to_string(data.labels.size()) + ") disagree");
  require_finite(data.features, "seen dataset: features");
  require_finite(data.attributes, "seen dataset: attributes");

  // class-specific attributes: samples of one class share a column
  std::set<int> seen_ids;
  for (Index i = 0; i < n; ++i) {
    const int cls = data.labels[static_cast<size_t>(i)];
    if (!seen_ids.insert(cls).second) continue;
    for (Index j = i + 1; j < n; ++j) {
      if (data.labels[static_cast<size_t>(j)] != cls) continue;
      if (data.attributes.col(i) != data.attributes.col(j))
        throw data_error("seen dataset: class " + std::to_string(cls) +
                         " has differing attribute columns");
    }
  }
}

inline void validate(const UnseenPrototypes& protos) {
  if (protos.attributes.cols() !=
      static_cast<Index>(protos.labels.size()))
    throw data_error("prototypes: attribute columns (" +
                     std::to_string(protos.attributes.cols()) +
                     ") vs labels (" + std::to_string(protos.labels.size()) +
                     ") disagree");
  require_finite(protos.attributes, "prototypes: attributes");
  for (Index i = 0; i < protos.attributes.cols(); ++i)
    for (Index j = i + 1; j < protos.attributes.cols(); ++j)
      if (protos.attributes.col(i) == protos.attributes.col(j))
        throw data_error("prototypes: columns " + std::to_string(i) + " and " +
                         std::to_string(j) + " coincide");
  std::set<int> ids(protos.labels.begin(), protos.labels.end());
  if (ids.size() != protos.labels.size())
    throw data_error("prototypes: class ids must be distinct");
}

/// Seen and unseen class id sets must not overlap.
inline void validate_disjoint(const SeenDataset& data,
                              const UnseenPrototypes& protos) {
  std::set<int> seen(data.labels.begin(), data.labels.end());
  for (int cls : protos.labels)
    if (seen.count(cls))
      throw data_error("class " + std::to_string(cls) +
                       " appears in both seen and unseen label sets");
}

}  // namespace jdzsl
