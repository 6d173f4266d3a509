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

#include "normality.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "error.h"
#include "pair_reduce.h"

namespace distmetric {

std::string_view NormalityTestName(NormalityTest test) {
  switch (test) {
    case NormalityTest::kMardiaSkewness: return "mardia_skewness";
    case NormalityTest::kMardiaKurtosis: return "mardia_kurtosis";
    case NormalityTest::kHenzeZirkler: return "henze_zirkler";
  }
  return "unknown";
}

namespace tails {

namespace {
constexpr double kDirectFloor = 1e-280;
}

double LogChiSquareUpper(double statistic, double dof) {
  if (statistic <= 0.0) return 0.0;
  const double a = 0.5 * dof;
  const double x = 0.5 * statistic;
  const double q = boost::math::gamma_q(a, x);
  if (q > kDirectFloor) return std::log(q);
  // Continued fraction for Q(a, x) evaluated in log space (valid for
  // x > a + 1, which holds whenever Q underflows).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return -x + a * std::log(x) - std::lgamma(a) + std::log(h);
}

double LogNormalUpper(double z) {
  const double p = 0.5 * boost::math::erfc(z / std::numbers::sqrt2);
  if (p > kDirectFloor) return std::log(p);
  // Asymptotic expansion of the Mills ratio.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

}  // namespace tails

namespace {

constexpr double kEigenFloor = 1e-12;

// Centered data mapped through S^{-1/2}, S the ML covariance. Mahalanobis
// quantities become Euclidean ones on the rows of `z`.
struct Whitened {
  RowMatrix z;
  std::size_t floored = 0;
};

Whitened Whiten(const EmbeddingSet& set, const NormalityOptions& options) {
  const std::size_t n = set.rows();
  const std::size_t d = set.cols();
  if (n < d + 2) {
    Fail(ErrorCode::kInsufficientSamples, "normality tests need N >= D + 2 (N=" +
                                              std::to_string(n) + ", D=" + std::to_string(d) + ")");
  }
  const Eigen::RowVectorXd mean = set.data().colwise().mean();
  RowMatrix centered = set.data().rowwise() - mean;
  Eigen::MatrixXd s = centered.transpose() * centered / static_cast<double>(n);
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success) Fail(ErrorCode::kSingularCovariance, "eigendecomposition failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  const double floor = kEigenFloor * lambda_max;
  Eigen::VectorXd inv_root(static_cast<Eigen::Index>(d));
  Whitened w;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (!(lambda_max > 0.0) || lambda[k] <= floor) {
      inv_root[k] = 0.0;
      ++w.floored;
    } else {
      inv_root[k] = 1.0 / std::sqrt(lambda[k]);
    }
  }
  if (w.floored > 0 && (!options.allow_pseudo_inverse || w.floored == d)) {
    Fail(ErrorCode::kSingularCovariance,
         std::to_string(w.floored) + " covariance eigenvalue(s) below 1e-12 * lambda_max");
  }
  w.z = centered * eig.eigenvectors() * inv_root.asDiagonal();
  return w;
}

PairSumOptions PairOptions(const NormalityOptions& options) {
  PairSumOptions p;
  p.threads = options.threads;
  p.block_size = options.block_size;
  p.exclude_diagonal = false;
  return p;
}

double CubeTerm(double dot, double, double, const void*) { return dot * dot * dot; }

struct HzContext {
  double half_beta_sq;
};

double HzTerm(double dot, double sq_x, double sq_y, const void* ctx) {
  const auto* c = static_cast<const HzContext*>(ctx);
  const double dist = std::max(sq_x + sq_y - 2.0 * dot, 0.0);
  return std::exp(-c->half_beta_sq * dist);
}

void SetLogP(NormalityReport& report, double log_p) {
  log_p = std::min(log_p, 0.0);
  report.log10_p = log_p / std::numbers::ln10;
  report.p_value = std::clamp(std::exp(log_p), 0.0, 1.0);
}

}  // namespace

NormalityReport MardiaSkewness(const EmbeddingSet& set, const NormalityOptions& options) {
  const Whitened w = Whiten(set, options);
  const double n = static_cast<double>(set.rows());
  const double d = static_cast<double>(set.cols());
  const double b1 = BlockedPairSum(w.z, nullptr, CubeTerm, nullptr, PairOptions(options)) / (n * n);
  NormalityReport r;
  r.test = NormalityTest::kMardiaSkewness;
  r.moment = b1;
  r.statistic = n * b1 / 6.0;
  r.n = set.rows();
  r.d = set.cols();
  r.floored_eigenvalues = w.floored;
  SetLogP(r, tails::LogChiSquareUpper(r.statistic, d * (d + 1.0) * (d + 2.0) / 6.0));
  return r;
}

NormalityReport MardiaKurtosis(const EmbeddingSet& set, const NormalityOptions& options) {
  const Whitened w = Whiten(set, options);
  const double n = static_cast<double>(set.rows());
  const double d = static_cast<double>(set.cols());
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < w.z.rows(); ++i) {
    const double m = w.z.row(i).squaredNorm();
    acc.Add(m * m);
  }
  const double b2 = acc.Value() / n;
  NormalityReport r;
  r.test = NormalityTest::kMardiaKurtosis;
  r.moment = b2;
  r.statistic = (b2 - d * (d + 2.0)) / std::sqrt(8.0 * d * (d + 2.0) / n);
  r.n = set.rows();
  r.d = set.cols();
  r.floored_eigenvalues = w.floored;
  SetLogP(r, std::numbers::ln2 + tails::LogNormalUpper(std::abs(r.statistic)));
  return r;
}

NormalityReport HenzeZirkler(const EmbeddingSet& set, const NormalityOptions& options) {
  const Whitened w = Whiten(set, options);
  const double n = static_cast<double>(set.rows());
  const double d = static_cast<double>(set.cols());
  const double beta =
      std::pow((2.0 * d + 1.0) * n / 4.0, 1.0 / (d + 4.0)) / std::numbers::sqrt2;
  const double b2 = beta * beta;

  const HzContext ctx{0.5 * b2};
  const double pair_sum = BlockedPairSum(w.z, nullptr, HzTerm, &ctx, PairOptions(options));
  CompensatedSum single;
  for (Eigen::Index i = 0; i < w.z.rows(); ++i) {
    single.Add(std::exp(-b2 * w.z.row(i).squaredNorm() / (2.0 * (1.0 + b2))));
  }
  const double t = n * (pair_sum / (n * n) -
                        2.0 * std::pow(1.0 + b2, -d / 2.0) * single.Value() / n +
                        std::pow(1.0 + 2.0 * b2, -d / 2.0));

  // Lognormal approximation of the null distribution.
  const double a = 1.0 + 2.0 * b2;
  const double b4 = b2 * b2;
  const double b8 = b4 * b4;
  const double mu = 1.0 - std::pow(a, -d / 2.0) *
                              (1.0 + d * b2 / a + d * (d + 2.0) * b4 / (2.0 * a * a));
  const double wb = (1.0 + b2) * (1.0 + 3.0 * b2);
  const double si2 =
      2.0 * std::pow(1.0 + 4.0 * b2, -d / 2.0) +
      2.0 * std::pow(a, -d) *
          (1.0 + 2.0 * d * b4 / (a * a) + 3.0 * d * (d + 2.0) * b8 / (4.0 * a * a * a * a)) -
      4.0 * std::pow(wb, -d / 2.0) *
          (1.0 + 3.0 * d * b4 / (2.0 * wb) + d * (d + 2.0) * b8 / (2.0 * wb * wb));
  const double log_mean = std::log(std::sqrt(mu * mu * mu * mu / (si2 + mu * mu)));
  const double log_sd = std::sqrt(std::log((si2 + mu * mu) / (mu * mu)));

  NormalityReport r;
  r.test = NormalityTest::kHenzeZirkler;
  r.moment = beta;
  r.statistic = t;
  r.n = set.rows();
  r.d = set.cols();
  r.floored_eigenvalues = w.floored;
  if (t <= 0.0) {
    SetLogP(r, 0.0);
  } else {
    SetLogP(r, tails::LogNormalUpper((std::log(t) - log_mean) / log_sd));
  }
  return r;
}

NormalityReport RunNormalityTest(NormalityTest test, const EmbeddingSet& set,
                                 const NormalityOptions& options) {
  switch (test) {
    case NormalityTest::kMardiaSkewness: return MardiaSkewness(set, options);
    case NormalityTest::kMardiaKurtosis: return MardiaKurtosis(set, options);
    case NormalityTest::kHenzeZirkler: return HenzeZirkler(set, options);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown normality test");
}

}  // namespace distmetric
