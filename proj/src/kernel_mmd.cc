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

#include "kernel_mmd.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "error.h"
#include "pair_reduce.h"
#include "random.h"

namespace distmetric {

KernelSpec KernelSpec::Fixed(double sigma) {
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    Fail(ErrorCode::kDomain, "kernel bandwidth must be finite and > 0");
  }
  KernelSpec spec;
  spec.median_ = false;
  spec.sigma_ = sigma;
  return spec;
}

double GaussianKernel(std::span<const double> r, std::span<const double> g, double sigma) {
  if (r.size() != g.size()) {
    Fail(ErrorCode::kDimension, "kernel arguments have different dimensions");
  }
  if (!(sigma > 0.0)) Fail(ErrorCode::kDomain, "sigma must be > 0");
  double sq = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - g[i];
    sq += d * d;
  }
  return std::exp(-sq / (2.0 * sigma * sigma));
}

namespace {

const double* PooledRow(const EmbeddingSet& ref, const EmbeddingSet& gen, std::size_t i) {
  if (i < ref.rows()) return ref.data().row(static_cast<Eigen::Index>(i)).data();
  return gen.data().row(static_cast<Eigen::Index>(i - ref.rows())).data();
}

// Maps a linear index over the strict upper triangle of an N x N matrix,
// enumerated row by row, back to (i, j).
std::pair<std::size_t, std::size_t> PairFromIndex(std::uint64_t k, std::uint64_t n) {
  // Row i starts at i(2n - i - 1)/2; invert the quadratic, then fix rounding
  // with a local search.
  const double nn = static_cast<double>(n);
  const double disc = std::max((nn - 0.5) * (nn - 0.5) - 2.0 * static_cast<double>(k), 0.0);
  const double guess = std::floor(nn - 0.5 - std::sqrt(disc));
  std::uint64_t i = guess < 0 ? 0 : static_cast<std::uint64_t>(guess);
  auto row_start = [n](std::uint64_t r) { return r * (2 * n - r - 1) / 2; };
  while (i > 0 && row_start(i) > k) --i;
  while (i + 1 < n && row_start(i + 1) <= k) ++i;
  const std::uint64_t j = i + 1 + (k - row_start(i));
  return {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
}

double Median(std::vector<double>& values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// True when a should be evaluated as the "first" set. Comparing shape and
// raw contents gives an argument-order independent evaluation order.
bool CanonicalOrder(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  if (a.cols() != b.cols()) return a.cols() < b.cols();
  const auto bytes = sizeof(double) * a.rows() * a.cols();
  return std::memcmp(a.data().data(), b.data().data(), bytes) <= 0;
}

struct KernelContext {
  double neg_inv_two_sigma_sq;
};

double KernelTerm(double dot, double sq_x, double sq_y, const void* ctx) {
  const auto* k = static_cast<const KernelContext*>(ctx);
  const double dist = std::max(sq_x + sq_y - 2.0 * dot, 0.0);
  return std::exp(dist * k->neg_inv_two_sigma_sq);
}

}  // namespace

double MedianHeuristicSigma(const EmbeddingSet& ref, const EmbeddingSet& gen,
                            std::size_t max_pairs, std::uint64_t seed) {
  if (ref.cols() != gen.cols()) Fail(ErrorCode::kDimension, "embedding dimensions differ");
  if (max_pairs < 1) Fail(ErrorCode::kInvalidArgument, "max_pairs must be >= 1");
  const std::uint64_t n = ref.rows() + gen.rows();
  const std::uint64_t total = n * (n - 1) / 2;
  const std::size_t dim = ref.cols();
  auto sq_dist = [&](std::size_t i, std::size_t j) {
    const double* a = PooledRow(ref, gen, i);
    const double* b = PooledRow(ref, gen, j);
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = a[c] - b[c];
      s += d * d;
    }
    return s;
  };

  std::vector<double> dists;
  if (total <= max_pairs) {
    dists.reserve(total);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) dists.push_back(sq_dist(i, j));
    }
  } else {
    Rng rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(max_pairs * 2);
    std::vector<std::uint64_t> order;
    order.reserve(max_pairs);
    while (order.size() < max_pairs) {
      const std::uint64_t k = rng.Below(total);
      if (chosen.insert(k).second) order.push_back(k);
    }
    dists.reserve(max_pairs);
    for (std::uint64_t k : order) {
      const auto [i, j] = PairFromIndex(k, n);
      dists.push_back(sq_dist(i, j));
    }
  }
  const bool all_zero = std::all_of(dists.begin(), dists.end(), [](double d) { return d == 0.0; });
  if (all_zero) {
    Fail(ErrorCode::kDegenerateData, "all sampled pairwise distances are zero; supply a fixed sigma");
  }
  const double median = Median(dists);
  if (!(median > 0.0)) {
    Fail(ErrorCode::kDegenerateData, "median pairwise distance is zero; supply a fixed sigma");
  }
  return std::sqrt(median / 2.0);
}

double ResolveSigma(const EmbeddingSet& ref, const EmbeddingSet& gen, const KernelSpec& kernel,
                    const MmdOptions& options) {
  if (!kernel.is_median()) return kernel.sigma();
  const bool keep = CanonicalOrder(ref, gen);
  return MedianHeuristicSigma(keep ? ref : gen, keep ? gen : ref, options.max_pairs,
                              options.seed);
}

MmdResult ComputeSmmd(const EmbeddingSet& ref_in, const EmbeddingSet& gen_in,
                      const KernelSpec& kernel, const MmdOptions& options) {
  if (ref_in.rows() < 2 || gen_in.rows() < 2) {
    Fail(ErrorCode::kInsufficientSamples, "SMMD needs at least 2 rows on each side, got " +
                                              std::to_string(ref_in.rows()) + " and " +
                                              std::to_string(gen_in.rows()));
  }
  if (ref_in.cols() != gen_in.cols()) {
    Fail(ErrorCode::kDimension, "embedding dimensions differ: " + std::to_string(ref_in.cols()) +
                                    " vs " + std::to_string(gen_in.cols()));
  }
  // The estimator is symmetric; evaluating in a content-defined order makes
  // the floating-point result symmetric too.
  const bool keep = CanonicalOrder(ref_in, gen_in);
  const EmbeddingSet& r = keep ? ref_in : gen_in;
  const EmbeddingSet& g = keep ? gen_in : ref_in;

  const double sigma = ResolveSigma(r, g, kernel, options);
  const KernelContext ctx{-1.0 / (2.0 * sigma * sigma)};

  // Distances are translation invariant; centering on the pooled mean keeps
  // |x|^2 + |y|^2 - 2<x,y> from cancelling badly.
  const Eigen::RowVectorXd pooled_mean =
      (r.data().colwise().sum() + g.data().colwise().sum()) /
      static_cast<double>(r.rows() + g.rows());
  const RowMatrix rc = r.data().rowwise() - pooled_mean;
  const RowMatrix gc = g.data().rowwise() - pooled_mean;

  PairSumOptions self_opts;
  self_opts.threads = options.threads;
  self_opts.block_size = options.block_size;
  self_opts.exclude_diagonal = true;
  PairSumOptions cross_opts = self_opts;
  cross_opts.exclude_diagonal = false;

  const double m = static_cast<double>(r.rows());
  const double n = static_cast<double>(g.rows());
  const double k_rr = BlockedPairSum(rc, nullptr, KernelTerm, &ctx, self_opts) / (m * (m - 1.0));
  const double k_gg = BlockedPairSum(gc, nullptr, KernelTerm, &ctx, self_opts) / (n * (n - 1.0));
  const double k_rg = BlockedPairSum(rc, &gc, KernelTerm, &ctx, cross_opts) / (m * n);

  MmdResult result;
  result.value = (k_rr + k_gg) - 2.0 * k_rg;
  result.sigma_used = sigma;
  result.m = ref_in.rows();
  result.n = gen_in.rows();
  return result;
}

}  // namespace distmetric
