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
#include <jdzsl/eval.hpp>
#include <jdzsl/synth.hpp>

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "oracles.hpp"

using jdzsl::EvalMode;
using jdzsl::HyperParams;
using jdzsl::Index;
using jdzsl::Matrix;
using jdzsl::Vector;

TEST_CASE("hit_at_k closed forms", "[eval]") {
  SECTION("all correct at K = 1") {
    Matrix scores(3, 4);
    scores.setZero();
    scores(0, 2) = scores(1, 0) = scores(2, 3) = 1.0;
    CHECK(jdzsl::hit_at_k(scores, {2, 0, 3}, 1) == 1.0);
  }

  SECTION("uniform scores fall back to the lowest indices") {
    Matrix scores = Matrix::Ones(4, 5);
    // tie rule picks columns {0..K-1}; a sample hits iff truth < K
    CHECK(jdzsl::hit_at_k(scores, {0, 1, 2, 4}, 2) == 0.5);
    CHECK(jdzsl::hit_at_k(scores, {0, 1, 2, 4}, 3) == 0.75);
  }

  SECTION("K above the class count is an error") {
    Matrix scores = Matrix::Ones(2, 3);
    CHECK_THROWS_AS(jdzsl::hit_at_k(scores, {0, 1}, 4), jdzsl::data_error);
  }
}

TEST_CASE("hit_at_k matches a brute-force top-K scan", "[eval]") {
  std::mt19937 rng(91);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> classes(0, 3);
  for (int trial = 0; trial < 40; ++trial) {
    Matrix scores(10, 4);
    for (Index i = 0; i < 10; ++i)
      for (Index j = 0; j < 4; ++j)
        scores(i, j) = trial % 3 == 0 ? std::round(unif(rng) * 4.0) / 4.0
                                      : unif(rng);  // force ties sometimes
    std::vector<Index> truth;
    for (int i = 0; i < 10; ++i) truth.push_back(classes(rng));
    for (int k = 1; k <= 4; ++k) {
      int hits = 0;
      for (Index i = 0; i < 10; ++i)
        if (oracle::topk_contains(Vector(scores.row(i)),
                                  static_cast<int>(truth[size_t(i)]), k))
          ++hits;
      CHECK(jdzsl::hit_at_k(scores, truth, k) ==
            Catch::Approx(hits / 10.0).margin(1e-15));
    }
  }
}

TEST_CASE("hit_at_k is monotone in K", "[eval]") {
  std::mt19937 rng(97);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> classes(0, 5);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix scores(8, 6);
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 6; ++j) scores(i, j) = unif(rng);
    std::vector<Index> truth;
    for (int i = 0; i < 8; ++i) truth.push_back(classes(rng));
    double prev = 0.0;
    for (int k = 1; k <= 6; ++k) {
      const double h = jdzsl::hit_at_k(scores, truth, k);
      CHECK(h >= prev);
      prev = h;
    }
    CHECK(jdzsl::hit_at_k(scores, truth, 6) == 1.0);
  }
}

namespace {

struct EvalFixture {
  jdzsl::SynthData data;
  jdzsl::JointDictionary dict;
  HyperParams hp;

  EvalFixture() {
    jdzsl::SynthSpec spec;
    spec.p = 12;
    spec.q = 6;
    spec.r_true = 24;
    spec.k_true = 3;
    spec.n_seen = 120;
    spec.m_unseen = 4;
    spec.seed = 33;
    data = jdzsl::gen_synthetic(spec);
    hp.r = 18;
    hp.lambda = 0.05;
    hp.outer_iters = 6;
    hp.fista_max_iter = 250;
    hp.seed = 4;
    auto trained = jdzsl::train(data.seen, data.protos, hp);
    dict = trained.first;
  }
};

}  // namespace

TEST_CASE("evaluate is deterministic and monotone in K", "[eval]") {
  static EvalFixture fx;
  auto r1 = jdzsl::evaluate(fx.dict, fx.data.test_features, fx.data.test_truth,
                            fx.data.protos, fx.hp,
                            {EvalMode::AAg, EvalMode::TAAw}, {1, 2});
  auto r2 = jdzsl::evaluate(fx.dict, fx.data.test_features, fx.data.test_truth,
                            fx.data.protos, fx.hp,
                            {EvalMode::AAg, EvalMode::TAAw}, {1, 2});
  for (EvalMode mode : {EvalMode::AAg, EvalMode::TAAw}) {
    CHECK(r1.at(mode).hit_at == r2.at(mode).hit_at);
    CHECK(r1.at(mode).hit_at.at(1) <= r1.at(mode).hit_at.at(3));
    CHECK(r1.at(mode).hit_at.at(3) <= r1.at(mode).hit_at.at(5));
    // 4 unseen classes: K = 5 clamps to 4 and must saturate
    CHECK(r1.at(mode).hit_at.at(5) == 1.0);
  }
}

TEST_CASE("evaluate per-class accuracy averages to the overall accuracy",
          "[eval]") {
  static EvalFixture fx;
  // the fixture is balanced: 8 test samples per unseen class
  auto reports =
      jdzsl::evaluate(fx.dict, fx.data.test_features, fx.data.test_truth,
                      fx.data.protos, fx.hp, {EvalMode::AAw}, {7});
  const auto& report = reports.at(EvalMode::AAw);
  double mean = 0.0;
  for (const auto& [cls, acc] : report.per_class_accuracy) mean += acc;
  mean /= static_cast<double>(report.per_class_accuracy.size());
  CHECK(mean == Catch::Approx(report.hit_at.at(1)).margin(1e-12));
}

TEST_CASE("evaluate with a single prototype is trivially perfect", "[eval]") {
  static EvalFixture fx;
  jdzsl::UnseenPrototypes single;
  single.attributes = fx.data.protos.attributes.leftCols(1);
  single.labels = {fx.data.protos.labels[0]};
  Matrix features = fx.data.test_features.leftCols(8);
  std::vector<int> truth(8, single.labels[0]);

  auto reports = jdzsl::evaluate(fx.dict, features, truth, single, fx.hp,
                                 {EvalMode::AAg}, {1});
  CHECK(reports.at(EvalMode::AAg).hit_at.at(1) == 1.0);
}

TEST_CASE("evaluate rejects truth labels outside the prototype set",
          "[eval]") {
  static EvalFixture fx;
  std::vector<int> truth = fx.data.test_truth;
  truth[0] = 9999;
  CHECK_THROWS_AS(
      jdzsl::evaluate(fx.dict, fx.data.test_features, truth, fx.data.protos,
                      fx.hp, {EvalMode::AAg}, {1}),
      jdzsl::data_error);
}
