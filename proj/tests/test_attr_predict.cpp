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
#include <jdzsl/attr_predict.hpp>

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "oracles.hpp"

using jdzsl::HyperParams;
using jdzsl::Index;
using jdzsl::JointDictionary;
using jdzsl::Matrix;
using jdzsl::UnseenPrototypes;
using jdzsl::Vector;

namespace {

JointDictionary random_dict(std::mt19937& rng, Index p, Index q, Index r) {
  std::normal_distribution<double> normal(0.0, 1.0);
  JointDictionary dict;
  dict.dx.resize(p, r);
  dict.dz.resize(q, r);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < r; ++j) dict.dx(i, j) = normal(rng);
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < r; ++j) dict.dz(i, j) = normal(rng);
  jdzsl::normalize_columns(dict.dx);
  jdzsl::normalize_columns(dict.dz);
  return dict;
}

UnseenPrototypes random_protos(std::mt19937& rng, Index q, Index m) {
  std::normal_distribution<double> normal(0.0, 1.0);
  UnseenPrototypes protos;
  protos.attributes.resize(q, m);
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < m; ++j) protos.attributes(i, j) = normal(rng);
  for (Index j = 0; j < m; ++j)
    protos.labels.push_back(100 + static_cast<int>(j));
  return protos;
}

// direct transliteration of the t-kernel softmax and entropy, no log tricks
double naive_aaw_objective(const Vector& a, const Vector& x,
                           const JointDictionary& dict,
                           const UnseenPrototypes& protos,
                           const HyperParams& hp) {
  const double p = double(dict.dx.rows());
  Vector zhat = dict.dz * a;
  const Index m = protos.attributes.cols();
  std::vector<double> kernels;
  double total = 0.0;
  for (Index j = 0; j < m; ++j) {
    const double d2 = (zhat - protos.attributes.col(j)).squaredNorm();
    kernels.push_back(std::pow(1.0 + d2 / hp.rho, -(hp.rho + 1.0) / 2.0));
    total += kernels.back();
  }
  double entropy = 0.0;
  for (double k : kernels) {
    const double prob = k / total;
    if (prob > 0.0) entropy -= prob * std::log(prob);
  }
  return (x - dict.dx * a).squaredNorm() / p + hp.gamma * entropy +
         hp.lambda / double(dict.atoms()) * a.lpNorm<1>();
}

}  // namespace

TEST_CASE("soft_assign closed forms", "[attr_predict]") {
  SECTION("equidistant prototypes split evenly") {
    UnseenPrototypes protos;
    protos.attributes.resize(2, 2);
    protos.attributes.col(0) << 1.0, 0.0;
    protos.attributes.col(1) << -1.0, 0.0;
    protos.labels = {0, 1};
    auto sa = jdzsl::soft_assign(Vector(Vector::Zero(2)), protos, 1.0);
    CHECK(sa.probs[0] == Catch::Approx(0.5).margin(1e-14));
    CHECK(sa.probs[1] == Catch::Approx(0.5).margin(1e-14));
  }

  SECTION("rho = 1, squared distances (0, 3) give (0.8, 0.2)") {
    UnseenPrototypes protos;
    protos.attributes.resize(1, 2);
    protos.attributes(0, 0) = 0.0;
    protos.attributes(0, 1) = std::sqrt(3.0);
    protos.labels = {0, 1};
    Vector zhat(1);
    zhat << 0.0;
    auto sa = jdzsl::soft_assign(zhat, protos, 1.0);
    CHECK(sa.probs[0] == Catch::Approx(0.8).margin(1e-12));
    CHECK(sa.probs[1] == Catch::Approx(0.2).margin(1e-12));
  }

  SECTION("single prototype is certain with zero entropy") {
    UnseenPrototypes protos;
    protos.attributes = Matrix::Ones(3, 1);
    protos.labels = {7};
    auto sa = jdzsl::soft_assign(Vector(Vector::Zero(3)), protos, 2.0);
    CHECK(sa.probs[0] == 1.0);
    CHECK(sa.entropy == 0.0);
  }
}

TEST_CASE("soft_assign always yields a probability vector", "[attr_predict]") {
  std::mt19937 rng(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Index q = 4, m = 5;
    auto protos = random_protos(rng, q, m);
    Vector zhat(q);
    for (Index i = 0; i < q; ++i) zhat[i] = 100.0 * normal(rng);
    const double rho = trial % 2 ? 0.5 : 2.0;
    auto sa = jdzsl::soft_assign(zhat, protos, rho);
    CHECK(std::abs(sa.probs.sum() - 1.0) < 1e-12);
    CHECK(sa.probs.minCoeff() >= 0.0);
    CHECK(sa.entropy >= 0.0);
    CHECK(sa.entropy <= std::log(double(m)) + 1e-12);
  }
}

TEST_CASE("predict_aag zero input gives a zero code", "[attr_predict]") {
  std::mt19937 rng(1);
  auto dict = random_dict(rng, 4, 3, 6);
  HyperParams hp;
  hp.lambda = 0.1;
  Vector a = jdzsl::predict_aag(dict, Vector(Vector::Zero(4)), hp);
  CHECK(a.norm() == 0.0);
}

TEST_CASE("predict_aag recovers an orthonormal atom", "[attr_predict]") {
  // orthonormal-column dictionary: the solution is analytic up to shrinkage
  JointDictionary dict;
  dict.dx = Matrix::Zero(6, 3);
  dict.dx(0, 0) = dict.dx(2, 1) = dict.dx(4, 2) = 1.0;
  dict.dz = Matrix::Ones(2, 3) / std::sqrt(2.0);
  HyperParams hp;
  hp.lambda = 1e-4;
  hp.fista_tol = 1e-14;
  hp.fista_max_iter = 2000;

  Vector x = dict.dx.col(0);
  Vector a = jdzsl::predict_aag(dict, x, hp);
  Vector e1 = Vector::Zero(3);
  e1[0] = 1.0;
  CHECK((a - e1).norm() < 1e-3);

  const double lr = hp.lambda / 3.0;
  const double f_sol = (x - dict.dx * a).squaredNorm() / 6.0 + lr * a.lpNorm<1>();
  const double f_zero = x.squaredNorm() / 6.0;
  CHECK(f_sol <= f_zero);
}

TEST_CASE("aaw_objective reduces to the lasso objective when gamma is 0",
          "[attr_predict]") {
  std::mt19937 rng(5);
  auto dict = random_dict(rng, 4, 3, 6);
  auto protos = random_protos(rng, 3, 4);
  HyperParams hp;
  hp.gamma = 0.0;
  hp.lambda = 0.2;
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector a(6), x(4);
  for (Index i = 0; i < 6; ++i) a[i] = normal(rng);
  for (Index i = 0; i < 4; ++i) x[i] = normal(rng);

  const double lasso = (x - dict.dx * a).squaredNorm() / 4.0 +
                       hp.lambda / 6.0 * a.lpNorm<1>();
  CHECK(jdzsl::aaw_objective(a, x, dict, protos, hp) ==
        Catch::Approx(lasso).epsilon(1e-14));
}

TEST_CASE("aaw_objective with a one-hot assignment is almost pure lasso",
          "[attr_predict]") {
  JointDictionary dict;
  dict.dx = Matrix::Identity(2, 2);
  dict.dz = Matrix::Identity(2, 2);
  UnseenPrototypes protos;
  protos.attributes.resize(2, 2);
  protos.attributes.col(0) << 1.0, 0.0;
  protos.attributes.col(1) << 1000.0, 0.0;  // effectively unreachable
  protos.labels = {0, 1};
  HyperParams hp;
  hp.gamma = 1.0;
  hp.lambda = 0.1;

  Vector a(2);
  a << 1.0, 0.0;  // Dz a lands exactly on prototype 0
  Vector x(2);
  x << 0.7, 0.1;
  const double lasso =
      (x - dict.dx * a).squaredNorm() / 2.0 + hp.lambda / 2.0 * a.lpNorm<1>();
  CHECK(std::abs(jdzsl::aaw_objective(a, x, dict, protos, hp) - lasso) < 1e-4);
}

TEST_CASE("aaw_objective matches a naive summation oracle", "[attr_predict]") {
  std::mt19937 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto dict = random_dict(rng, 5, 4, 7);
    auto protos = random_protos(rng, 4, 3);
    HyperParams hp;
    hp.gamma = trial % 2 ? 0.1 : 1.0;
    hp.rho = trial % 3 ? 1.0 : 0.5;
    hp.lambda = 0.15;
    Vector a(7), x(5);
    for (Index i = 0; i < 7; ++i) a[i] = normal(rng);
    for (Index i = 0; i < 5; ++i) x[i] = normal(rng);
    const double got = jdzsl::aaw_objective(a, x, dict, protos, hp);
    const double want = naive_aaw_objective(a, x, dict, protos, hp);
    CHECK(std::abs(got - want) < 1e-10);
  }
}

TEST_CASE("grad_g with gamma 0 is the quadratic gradient", "[attr_predict]") {
  std::mt19937 rng(13);
  auto dict = random_dict(rng, 4, 3, 6);
  auto protos = random_protos(rng, 3, 2);
  HyperParams hp;
  hp.gamma = 0.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector a(6), x(4);
  for (Index i = 0; i < 6; ++i) a[i] = normal(rng);
  for (Index i = 0; i < 4; ++i) x[i] = normal(rng);

  Vector got = jdzsl::grad_g(a, x, dict, protos, hp);
  Vector want = 2.0 / 4.0 * (dict.dx.transpose() * (dict.dx * a - x));
  CHECK((got - want).norm() < 1e-14);
}

TEST_CASE("grad_g matches central finite differences", "[attr_predict]") {
  std::mt19937 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> dims(2, 6);
  const double rhos[] = {0.5, 1.0, 2.0};
  const double gammas[] = {0.0, 0.1, 1.0};

  for (int trial = 0; trial < 36; ++trial) {
    const Index p = dims(rng), q = dims(rng), r = dims(rng), m = dims(rng);
    auto dict = random_dict(rng, p, q, r);
    auto protos = random_protos(rng, q, m);
    HyperParams hp;
    hp.rho = rhos[trial % 3];
    hp.gamma = gammas[(trial / 3) % 3];
    Vector a(r), x(p);
    for (Index i = 0; i < r; ++i) a[i] = normal(rng);
    for (Index i = 0; i < p; ++i) x[i] = normal(rng);

    Vector analytic = jdzsl::grad_g(a, x, dict, protos, hp);
    Vector numeric = oracle::finite_difference_gradient(
        [&](const Vector& v) {
          return jdzsl::aaw_smooth_objective(v, x, dict, protos, hp);
        },
        a, 1e-6);
    const double rel =
        (analytic - numeric).norm() / std::max(1.0, numeric.norm());
    CHECK(rel < 1e-5);
  }
}

TEST_CASE("entropy gradient vanishes at a symmetric point", "[attr_predict]") {
  JointDictionary dict;
  dict.dx = Matrix::Identity(2, 2);
  dict.dz = Matrix::Identity(2, 2);
  UnseenPrototypes protos;
  protos.attributes.resize(2, 2);
  protos.attributes.col(0) << 0.8, 0.5;
  protos.attributes.col(1) << 0.8, -0.5;  // mirror image across the axis
  protos.labels = {0, 1};

  Vector a(2);
  a << 0.3, 0.0;  // Dz a sits exactly on the symmetry axis
  Vector x(2);
  x << 0.1, 0.2;

  HyperParams with_entropy;
  with_entropy.gamma = 1.0;
  HyperParams without;
  without.gamma = 0.0;
  Vector entropy_part = jdzsl::grad_g(a, x, dict, protos, with_entropy) -
                        jdzsl::grad_g(a, x, dict, protos, without);
  CHECK(entropy_part.norm() < 1e-10);
}

TEST_CASE("predict_aaw with gamma 0 coincides with predict_aag",
          "[attr_predict]") {
  std::mt19937 rng(23);
  auto dict = random_dict(rng, 5, 4, 8);
  auto protos = random_protos(rng, 4, 3);
  HyperParams hp;
  hp.gamma = 0.0;
  hp.lambda = 0.1;
  hp.fista_tol = 1e-14;
  hp.fista_max_iter = 20000;
  hp.aaw_max_iter = 4000;
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(5);
  for (Index i = 0; i < 5; ++i) x[i] = normal(rng);

  Vector aag = jdzsl::predict_aag(dict, x, hp);
  auto [aaw, report] = jdzsl::predict_aaw(dict, x, protos, hp);
  CHECK((aag - aaw).norm() < 1e-6);
}

TEST_CASE("predict_aaw lowers the soft-assignment entropy between prototypes",
          "[attr_predict]") {
  // atom 2 only moves the attribute estimate, so the entropy term can pull
  // the prediction toward the nearer prototype almost for free
  JointDictionary dict;
  dict.dx = Matrix::Zero(2, 3);
  dict.dx(0, 0) = 1.0;
  dict.dx(1, 1) = 1.0;
  dict.dz = Matrix::Zero(2, 3);
  dict.dz(0, 0) = 1.0;
  dict.dz(1, 2) = 1.0;

  UnseenPrototypes protos;
  protos.attributes.resize(2, 2);
  protos.attributes.col(0) << 1.0, 0.45;
  protos.attributes.col(1) << 1.0, -0.42;
  protos.labels = {0, 1};

  HyperParams hp;
  hp.lambda = 0.01;
  hp.gamma = 0.5;
  hp.rho = 1.0;
  hp.aaw_max_iter = 300;

  Vector x(2);
  x << 1.0, 0.0;

  Vector aag = jdzsl::predict_aag(dict, x, hp);
  auto [aaw, report] = jdzsl::predict_aaw(dict, x, protos, hp);

  auto entropy_of = [&](const Vector& code) {
    return jdzsl::soft_assign(Vector(dict.dz * code), protos, hp.rho).entropy;
  };
  CHECK(entropy_of(aaw) < entropy_of(aag));

  // best-iterate contract: returned objective never exceeds the init value
  CHECK(jdzsl::aaw_objective(aaw, x, dict, protos, hp) <=
        jdzsl::aaw_objective(aag, x, dict, protos, hp) + 1e-15);
}

TEST_CASE("predict_batch matches single-sample prediction and is equivariant",
          "[attr_predict]") {
  std::mt19937 rng(29);
  auto dict = random_dict(rng, 5, 4, 8);
  auto protos = random_protos(rng, 4, 3);
  HyperParams hp;
  hp.lambda = 0.1;
  hp.gamma = 0.1;
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix features(5, 4);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 4; ++j) features(i, j) = normal(rng);

  auto batch = jdzsl::predict_batch(dict, features, protos, hp,
                                    jdzsl::PredictMode::AAw);
  CHECK(batch.predicted_attributes == Matrix(dict.dz * batch.codes));

  auto single =
      jdzsl::predict_aaw(dict, Vector(features.col(0)), protos, hp);
  CHECK((batch.codes.col(0) - single.first).norm() == 0.0);

  Matrix permuted(5, 4);
  const Index perm[] = {2, 0, 3, 1};
  for (Index j = 0; j < 4; ++j) permuted.col(j) = features.col(perm[j]);
  auto batch2 = jdzsl::predict_batch(dict, permuted, protos, hp,
                                     jdzsl::PredictMode::AAw);
  for (Index j = 0; j < 4; ++j)
    CHECK((batch2.codes.col(j) - batch.codes.col(perm[j])).norm() == 0.0);
}

TEST_CASE("predict_batch modes agree when gamma is 0", "[attr_predict]") {
  std::mt19937 rng(31);
  auto dict = random_dict(rng, 4, 3, 6);
  auto protos = random_protos(rng, 3, 2);
  HyperParams hp;
  hp.gamma = 0.0;
  hp.fista_tol = 1e-14;
  hp.fista_max_iter = 20000;
  hp.aaw_max_iter = 4000;
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix features(4, 3);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) features(i, j) = normal(rng);

  auto aag = jdzsl::predict_batch(dict, features, protos, hp,
                                  jdzsl::PredictMode::AAg);
  auto aaw = jdzsl::predict_batch(dict, features, protos, hp,
                                  jdzsl::PredictMode::AAw);
  CHECK((aag.codes - aaw.codes).norm() < 1e-6);
}
