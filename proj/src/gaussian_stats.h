// Copyright (c) 2026 The distmetric Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DISTMETRIC_GAUSSIAN_STATS_H_
#define DISTMETRIC_GAUSSIAN_STATS_H_

#include <cstddef>

#include <Eigen/Core>

#include "tensor_io.h"

namespace distmetric {

// Mean and unbiased covariance of one embedding set.
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // symmetric, PSD up to rounding
  std::size_t count = 0;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

// Column means and (N-1)-normalized covariance, symmetrized. Requires N >= 2.
GaussianStats EstimateStats(const EmbeddingSet& set);
GaussianStats EstimateStats(const RowMatrix& data);

// Principal square root of a symmetric PSD matrix via eigendecomposition.
// Eigenvalues in [-1e-8 * lambda_max, 0) are clamped to zero; anything more
// negative raises NotPSD. Asymmetry beyond 1e-9 (relative to the largest
// entry) raises DomainError.
Eigen::MatrixXd SqrtmPsd(const Eigen::MatrixXd& m);

// tr(sqrt(a b)) for symmetric PSD a, b. Evaluated as the nuclear norm of
// sqrt(a) sqrt(b), whose singular values are the square roots of the
// eigenvalues of sqrt(a) b sqrt(a).
double TraceSqrtProduct(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct FsdResult {
  double value = 0.0;      // max(raw_value, 0)
  double raw_value = 0.0;  // before clamping
};

// |mu_r - mu_g|^2 + tr(S_r + S_g - 2 sqrt(S_r S_g)).
FsdResult ComputeFsd(const GaussianStats& ref, const GaussianStats& gen);

}  // namespace distmetric

#endif  // DISTMETRIC_GAUSSIAN_STATS_H_
