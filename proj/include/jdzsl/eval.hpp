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

#include <jdzsl/attr_predict.hpp>
#include <jdzsl/transductive.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace jdzsl {

struct EvalReport {
  std::map<int, double> hit_at;       // K -> mean accuracy over seeds
  std::map<int, double> hit_at_std;   // K -> standard deviation over seeds
  std::map<int, double> per_class_accuracy;  // class id -> mean hit@1
  Index n_test = 0;
  std::vector<std::uint64_t> seeds_used;
};

enum class EvalMode { AAg, AAw, TAAw };

inline std::string to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::AAg: return "aag";
    case EvalMode::AAw: return "aaw";
    case EvalMode::TAAw: return "taaw";
  }
  return "?";
}

/// Fraction of rows whose true column is among the top-K scores. Score ties
/// at the boundary resolve toward the lower column index.
inline double hit_at_k(const Matrix& scores,
                       const std::vector<Index>& truth_columns, int k) {
  const Index l = scores.rows();
  const Index c = scores.cols();
  if (k < 1) throw data_error("hit_at_k: K must be at least 1");
  if (k > c)
    throw data_error("hit_at_k: K (" + std::to_string(k) +
                     ") exceeds the class count (" + std::to_string(c) + ")");
  if (static_cast<Index>(truth_columns.size()) != l)
    throw data_error("hit_at_k: truth length mismatch");

  int hits = 0;
  std::vector<Index> order(static_cast<size_t>(c));
  for (Index i = 0; i < l; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Index a, Index b) {
                        if (scores(i, a) != scores(i, b))
                          return scores(i, a) > scores(i, b);
                        return a < b;
                      });
    const Index truth = truth_columns[static_cast<size_t>(i)];
    if (truth < 0 || truth >= c)
      throw data_error("hit_at_k: truth column out of range");
    if (std::find(order.begin(), order.begin() + k, truth) !=
        order.begin() + k)
      ++hits;
  }
  return l > 0 ? static_cast<double>(hits) / static_cast<double>(l) : 0.0;
}

/// hit@1 from hard labels.
inline double hit_at_1(const std::vector<int>& predicted,
                       const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw data_error("hit_at_1: length mismatch");
  if (predicted.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace detail {

struct SeedOutcome {
  std::vector<int> labels;  // hard assignment per test sample
  Matrix scores;            // l x C in ascending-class-id column order
};

inline std::vector<int> sorted_class_ids(const UnseenPrototypes& protos) {
  std::vector<int> ids = protos.labels;
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline std::vector<Index> truth_columns(const std::vector<int>& truth,
                                        const std::vector<int>& class_ids) {
  std::vector<Index> cols;
  cols.reserve(truth.size());
  for (int cls : truth) {
    auto it = std::lower_bound(class_ids.begin(), class_ids.end(), cls);
    if (it == class_ids.end() || *it != cls)
      throw data_error("evaluate: truth label " + std::to_string(cls) +
                       " is not an unseen class");
    cols.push_back(static_cast<Index>(it - class_ids.begin()));
  }
  return cols;
}

// soft-assignment probabilities rearranged into class-id column order
inline Matrix assignment_scores(const PredictionResult& prediction,
                                const UnseenPrototypes& protos,
                                const std::vector<int>& class_ids) {
  const Index l = static_cast<Index>(prediction.assignments.size());
  const Index c = static_cast<Index>(class_ids.size());
  Matrix scores(l, c);
  std::vector<Index> column(protos.labels.size());
  for (size_t j = 0; j < protos.labels.size(); ++j) {
    auto it = std::lower_bound(class_ids.begin(), class_ids.end(),
                               protos.labels[j]);
    column[j] = static_cast<Index>(it - class_ids.begin());
  }
  for (Index i = 0; i < l; ++i)
    for (size_t j = 0; j < protos.labels.size(); ++j)
      scores(i, column[j]) = prediction.assignments[static_cast<size_t>(i)]
                                 .probs[static_cast<Index>(j)];
  return scores;
}

}  // namespace detail

/// End-to-end evaluation of the requested modes: predicts attributes,
/// assigns labels (nearest neighbor for AAg/AAw, label propagation for
/// TAAw), and reports flat hit@{1,3,5} means over the given seeds. K values
/// above the class count are clamped to it, so hit@K = 1 there.
inline std::map<EvalMode, EvalReport> evaluate(
    const JointDictionary& dict, const Matrix& test_features,
    const std::vector<int>& truth, const UnseenPrototypes& protos,
    const HyperParams& params, const std::vector<EvalMode>& modes,
    const std::vector<std::uint64_t>& seeds) {
  validate(protos);
  if (test_features.cols() != static_cast<Index>(truth.size()))
    throw data_error("evaluate: test feature columns (" +
                     std::to_string(test_features.cols()) + ") != truth (" +
                     std::to_string(truth.size()) + ")");
  if (seeds.empty()) throw data_error("evaluate: need at least one seed");

  const std::vector<int> class_ids = detail::sorted_class_ids(protos);
  const std::vector<Index> truth_cols =
      detail::truth_columns(truth, class_ids);
  const int n_classes = static_cast<int>(class_ids.size());
  const Index l = test_features.cols();

  std::map<EvalMode, EvalReport> reports;
  for (EvalMode mode : modes) {
    // prediction itself is deterministic; only the transductive stage
    // consumes the seed
    PredictionResult prediction = predict_batch(
        dict, test_features, protos, params,
        mode == EvalMode::AAg ? PredictMode::AAg : PredictMode::AAw);

    std::vector<detail::SeedOutcome> outcomes;
    for (std::uint64_t seed : seeds) {
      detail::SeedOutcome outcome;
      if (mode == EvalMode::TAAw) {
        HyperParams seeded = params;
        seeded.seed = seed;
        TaawResult taaw =
            taaw_run(prediction.predicted_attributes, protos, seeded);
        outcome.labels = taaw.labels;
        outcome.scores =
            taaw.distribution.scores.bottomRows(l);  // test-node rows
      } else {
        outcome.labels = nn_assign(prediction.predicted_attributes, protos);
        outcome.scores =
            detail::assignment_scores(prediction, protos, class_ids);
      }
      outcomes.push_back(std::move(outcome));
    }

    EvalReport report;
    report.n_test = l;
    report.seeds_used = seeds;
    for (int k : {1, 3, 5}) {
      const int clamped = std::min(k, n_classes);
      std::vector<double> values;
      for (const auto& outcome : outcomes)
        values.push_back(clamped == 1
                             ? hit_at_1(outcome.labels, truth)
                             : hit_at_k(outcome.scores, truth_cols, clamped));
      const double mean =
          std::accumulate(values.begin(), values.end(), 0.0) / values.size();
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      report.hit_at[k] = mean;
      report.hit_at_std[k] = std::sqrt(var / values.size());
    }

    for (int cls : class_ids) {
      double total = 0.0;
      for (const auto& outcome : outcomes) {
        int hits = 0, count = 0;
        for (size_t i = 0; i < truth.size(); ++i) {
          if (truth[i] != cls) continue;
          ++count;
          if (outcome.labels[i] == cls) ++hits;
        }
        total += count > 0 ? static_cast<double>(hits) / count : 0.0;
      }
      report.per_class_accuracy[cls] = total / outcomes.size();
    }
    reports.emplace(mode, std::move(report));
  }
  return reports;
}

}  // namespace jdzsl
