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

#ifndef DISTMETRIC_KERNEL_MMD_H_
#define DISTMETRIC_KERNEL_MMD_H_

#include <cstddef>
#include <cstdint>
#include <span>

#include "tensor_io.h"

namespace distmetric {

// Bandwidth of the Gaussian kernel: a fixed sigma, or the median heuristic
// over pooled reference and generated rows.
class KernelSpec {
 public:
  static KernelSpec Fixed(double sigma);
  static KernelSpec MedianHeuristic() { return KernelSpec(); }

  bool is_median() const { return median_; }
  double sigma() const { return sigma_; }

 private:
  KernelSpec() = default;
  bool median_ = true;
  double sigma_ = 0.0;
};

struct MmdOptions {
  unsigned threads = 1;
  std::uint64_t seed = 42;
  std::size_t max_pairs = 100000;
  std::size_t block_size = 1024;
};

struct MmdResult {
  double value = 0.0;
  double sigma_used = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
};

// exp(-|r - g|^2 / (2 sigma^2)).
double GaussianKernel(std::span<const double> r, std::span<const double> g, double sigma);

// sqrt(median(|x_i - x_j|^2) / 2) over distinct pairs of the pooled rows
// (ref rows first). Uses every pair when there are at most max_pairs of
// them, otherwise max_pairs distinct pairs drawn with `seed`.
double MedianHeuristicSigma(const EmbeddingSet& ref, const EmbeddingSet& gen,
                            std::size_t max_pairs, std::uint64_t seed);

// Unbiased squared MMD with a Gaussian kernel:
//   1/(m(m-1)) sum_{i!=j} k(R_i,R_j) + 1/(n(n-1)) sum_{i!=j} k(G_i,G_j)
//   - 2/(mn) sum_{i,j} k(R_i,G_j).
// Evaluated block by block; memory beyond the inputs is a few
// block_size^2 buffers. Swapping the arguments gives the same bits.
MmdResult ComputeSmmd(const EmbeddingSet& ref, const EmbeddingSet& gen,
                      const KernelSpec& kernel, const MmdOptions& options = {});

// Resolves the bandwidth ComputeSmmd would use for (ref, gen).
double ResolveSigma(const EmbeddingSet& ref, const EmbeddingSet& gen,
                    const KernelSpec& kernel, const MmdOptions& options);

}  // namespace distmetric

#endif  // DISTMETRIC_KERNEL_MMD_H_
