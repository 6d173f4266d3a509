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

#include "pair_reduce.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace distmetric {

unsigned DefaultThreads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void ParallelFor(std::size_t count, unsigned threads,
                 const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = DefaultThreads();
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct BlockTask {
  std::size_t row_block;
  std::size_t col_block;
};

}  // namespace

double BlockedPairSum(const RowMatrix& x, const RowMatrix* y, PairTerm term,
                      const void* ctx, const PairSumOptions& options) {
  const bool self = (y == nullptr);
  const RowMatrix& other = self ? x : *y;
  const std::size_t bs = std::max<std::size_t>(options.block_size, 1);
  const auto nx = static_cast<std::size_t>(x.rows());
  const auto ny = static_cast<std::size_t>(other.rows());
  if (nx == 0 || ny == 0) return 0.0;

  const Eigen::VectorXd sq_x = x.rowwise().squaredNorm();
  const Eigen::VectorXd sq_y = self ? sq_x : Eigen::VectorXd(other.rowwise().squaredNorm());

  const std::size_t row_blocks = (nx + bs - 1) / bs;
  const std::size_t col_blocks = (ny + bs - 1) / bs;
  std::vector<BlockTask> tasks;
  for (std::size_t bi = 0; bi < row_blocks; ++bi) {
    for (std::size_t bj = self ? bi : 0; bj < col_blocks; ++bj) {
      tasks.push_back({bi, bj});
    }
  }
  std::vector<double> partial(tasks.size(), 0.0);

  unsigned threads = options.threads == 0 ? DefaultThreads() : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));
  std::vector<Eigen::MatrixXd> buffers(std::max(threads, 1u));
  std::atomic<unsigned> buffer_slot{0};
  auto run_block = [&](std::size_t t, Eigen::MatrixXd& gram) {
    const auto& task = tasks[t];
    const std::size_t r0 = task.row_block * bs;
    const std::size_t c0 = task.col_block * bs;
    const std::size_t rn = std::min(bs, nx - r0);
    const std::size_t cn = std::min(bs, ny - c0);
    gram.resize(static_cast<Eigen::Index>(rn), static_cast<Eigen::Index>(cn));
    gram.noalias() =
        x.middleRows(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(rn)) *
        other.middleRows(static_cast<Eigen::Index>(c0), static_cast<Eigen::Index>(cn))
            .transpose();
    const bool diagonal_block = self && task.row_block == task.col_block;
    CompensatedSum acc;
    for (std::size_t i = 0; i < rn; ++i) {
      const double si = sq_x[static_cast<Eigen::Index>(r0 + i)];
      for (std::size_t j = 0; j < cn; ++j) {
        if (diagonal_block && options.exclude_diagonal && i == j) continue;
        acc.Add(term(gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), si,
                     sq_y[static_cast<Eigen::Index>(c0 + j)], ctx));
      }
    }
    double value = acc.Value();
    // Off-diagonal blocks of a self sum stand in for their transposes.
    if (self && !diagonal_block) value *= 2.0;
    partial[t] = value;
  };

  if (threads <= 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_block(t, buffers[0]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      Eigen::MatrixXd& gram = buffers[buffer_slot.fetch_add(1)];
      while (true) {
        const std::size_t t = next.fetch_add(1);
        if (t >= tasks.size()) return;
        try {
          run_block(t, gram);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(tasks.size());
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  CompensatedSum total;
  for (double p : partial) total.Add(p);
  return total.Value();
}

}  // namespace distmetric
