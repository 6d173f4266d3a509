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

#ifndef DISTMETRIC_NORMALITY_H_
#define DISTMETRIC_NORMALITY_H_

#include <cstddef>
#include <string_view>

#include "tensor_io.h"

namespace distmetric {

enum class NormalityTest { kMardiaSkewness, kMardiaKurtosis, kHenzeZirkler };

std::string_view NormalityTestName(NormalityTest test);

struct NormalityReport {
  NormalityTest test = NormalityTest::kMardiaSkewness;
  double statistic = 0.0;
  double p_value = 1.0;
  // log10 of the p-value, finite even when p_value underflows to 0.
  double log10_p = 0.0;
  // b1,d for skewness, b2,d for kurtosis, beta for Henze-Zirkler.
  double moment = 0.0;
  std::size_t n = 0;
  std::size_t d = 0;
  // Covariance eigenvalues treated as zero (pseudo-inverse mode only).
  std::size_t floored_eigenvalues = 0;
};

struct NormalityOptions {
  unsigned threads = 1;
  std::size_t block_size = 1024;
  // Floor covariance eigenvalues below 1e-12 * lambda_max and use the
  // pseudo-inverse instead of raising SingularCovariance.
  bool allow_pseudo_inverse = false;
};

// All three tests use the maximum-likelihood covariance (divisor N) and
// require N >= D + 2.
NormalityReport MardiaSkewness(const EmbeddingSet& set, const NormalityOptions& options = {});
NormalityReport MardiaKurtosis(const EmbeddingSet& set, const NormalityOptions& options = {});
NormalityReport HenzeZirkler(const EmbeddingSet& set, const NormalityOptions& options = {});
NormalityReport RunNormalityTest(NormalityTest test, const EmbeddingSet& set,
                                 const NormalityOptions& options = {});

namespace tails {

// Natural-log upper tails that stay finite far past double underflow.
double LogChiSquareUpper(double statistic, double dof);
double LogNormalUpper(double z);

}  // namespace tails

}  // namespace distmetric

#endif  // DISTMETRIC_NORMALITY_H_
