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

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace jdzsl {

// Row-major storage so the in-memory layout matches the on-disk matrix
// format byte for byte.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Invalid inputs: shape mismatches, malformed files, out-of-range parameters.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failures arising during computation: divergence, degenerate operands.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw data_error(what + ": non-finite entries");
}

inline void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) throw data_error(what + ": non-finite entries");
}

/// Scales each nonzero column to unit l2 norm (in place). Zero columns are
/// left untouched.
inline void normalize_columns(Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    const double n = m.col(j).norm();
    if (n > 0.0) m.col(j) /= n;
  }
}

}  // namespace jdzsl
