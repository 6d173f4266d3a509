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

#include "gaussian_stats.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "error.h"

namespace distmetric {

namespace {

constexpr double kAsymmetryTolerance = 1e-9;
constexpr double kNegativeEigenTolerance = 1e-8;

void CheckSquare(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    Fail(ErrorCode::kDimension, std::string(what) + " must be a nonempty square matrix");
  }
}

}  // namespace

GaussianStats EstimateStats(const RowMatrix& data) {
  if (data.rows() < 2) {
    Fail(ErrorCode::kInsufficientSamples,
         "need at least 2 rows to estimate a covariance, got " + std::to_string(data.rows()));
  }
  GaussianStats stats;
  stats.count = static_cast<std::size_t>(data.rows());
  stats.mean = data.colwise().mean().transpose();
  const RowMatrix centered = data.rowwise() - stats.mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered;
  cov /= static_cast<double>(data.rows() - 1);
  stats.cov = 0.5 * (cov + cov.transpose());
  return stats;
}

GaussianStats EstimateStats(const EmbeddingSet& set) { return EstimateStats(set.data()); }

Eigen::MatrixXd SqrtmPsd(const Eigen::MatrixXd& m) {
  CheckSquare(m, "sqrtm input");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kAsymmetryTolerance * scale) {
    Fail(ErrorCode::kDomain, "matrix is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) Fail(ErrorCode::kDomain, "eigendecomposition failed");
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  const double floor = -kNegativeEigenTolerance * std::max(lambda_max, 0.0);
  if (lambda.minCoeff() < floor) {
    Fail(ErrorCode::kNotPsd, "eigenvalue " + std::to_string(lambda.minCoeff()) +
                                 " below tolerance for lambda_max " +
                                 std::to_string(lambda_max));
  }
  const Eigen::VectorXd root = lambda.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd s = v * root.asDiagonal() * v.transpose();
  return 0.5 * (s + s.transpose());
}

double TraceSqrtProduct(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  CheckSquare(a, "first covariance");
  CheckSquare(b, "second covariance");
  if (a.rows() != b.rows()) {
    Fail(ErrorCode::kDimension, "covariance dimensions differ: " + std::to_string(a.rows()) +
                                    " vs " + std::to_string(b.rows()));
  }
  const Eigen::MatrixXd root_a = SqrtmPsd(a);
  const Eigen::MatrixXd root_b = SqrtmPsd(b);
  // Singular values are accurate to eps * sigma_max in absolute terms, while
  // square roots of eigenvalues of sqrt(a) b sqrt(a) would lose half the
  // digits on rank-deficient covariances.
  const Eigen::MatrixXd product = root_a * root_b;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(product);
  return svd.singularValues().sum();
}

FsdResult ComputeFsd(const GaussianStats& ref, const GaussianStats& gen) {
  if (ref.dim() != gen.dim() || ref.cov.rows() != gen.cov.rows()) {
    Fail(ErrorCode::kDimension, "embedding dimensions differ: " + std::to_string(ref.dim()) +
                                    " vs " + std::to_string(gen.dim()));
  }
  const double mean_term = (ref.mean - gen.mean).squaredNorm();
  const double trace_term =
      ref.cov.trace() + gen.cov.trace() - 2.0 * TraceSqrtProduct(ref.cov, gen.cov);
  FsdResult result;
  result.raw_value = mean_term + trace_term;
  result.value = std::max(result.raw_value, 0.0);
  return result;
}

}  // namespace distmetric
