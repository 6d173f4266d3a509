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

#ifndef DISTMETRIC_PAIR_REDUCE_H_
#define DISTMETRIC_PAIR_REDUCE_H_

#include <cmath>
#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "tensor_io.h"

namespace distmetric {

// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks must
// write only to their own output slots.
void ParallelFor(std::size_t count, unsigned threads,
                 const std::function<void(std::size_t)>& task);

// Worker count used when a caller passes 0.
unsigned DefaultThreads();

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double Value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct PairSumOptions {
  unsigned threads = 1;
  std::size_t block_size = 1024;
  // Skip a == b terms; only meaningful when both sides are the same matrix.
  bool exclude_diagonal = false;
};

// Pairwise term as a function of <x, y>, |x|^2 and |y|^2.
using PairTerm = double (*)(double dot, double sq_x, double sq_y, const void* ctx);

// Sum over all (i, j) of term(x_i, y_j) without materializing the full
// |x| x |y| matrix. Inner products of each block pair come from one GEMM into
// a block_size^2 buffer per worker. Per-block partial sums are compensated
// and combined in fixed row-major block order, so the result is identical
// for any thread count.
//
// When `y` is null the sum runs over x against itself and only the upper
// block triangle is evaluated; `term` must then be symmetric in (x, y).
double BlockedPairSum(const RowMatrix& x, const RowMatrix* y, PairTerm term,
                      const void* ctx, const PairSumOptions& options);

}  // namespace distmetric

#endif  // DISTMETRIC_PAIR_REDUCE_H_
