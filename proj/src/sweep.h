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

#ifndef DISTMETRIC_SWEEP_H_
#define DISTMETRIC_SWEEP_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kernel_mmd.h"
#include "tensor_io.h"

namespace distmetric {

enum class SweepStrategy {
  kRandomFraction,
  // Whole speakers accumulated until the utterance target is reached.
  kSpeakerFraction,
  // Alternative reading: keep x% of the speakers (rounded down, >= 1).
  kSpeakerCountFraction,
  kSnrLadder,
};

enum class Metric { kFsd, kSmmd };

std::string_view MetricName(Metric metric);
Metric ParseMetric(std::string_view name);

struct SweepSpec {
  SweepStrategy strategy = SweepStrategy::kRandomFraction;
  std::vector<double> fractions;  // percentages in (0, 100], strictly increasing
  std::vector<double> snrs_db;
  std::uint64_t seed = 42;
  unsigned repeats = 5;
  // Metrics evaluated per fraction sweep condition.
  std::vector<Metric> metrics = {Metric::kFsd, Metric::kSmmd};
};

struct CurvePoint {
  double condition = 0.0;
  Metric metric = Metric::kFsd;
  double value = 0.0;
  unsigned repeat_index = 0;
  std::size_t subset_size = 0;
  std::size_t n_speakers = 0;

  bool operator==(const CurvePoint&) const = default;
};

struct SweepCurve {
  std::vector<CurvePoint> points;
  double sigma_used = 0.0;

  std::string ToCsv() const;
  std::string ToJson() const;
};

// floor(N * fraction / 100) rows drawn uniformly without replacement
// (at least 2), returned in parent order. fraction 100 is the parent itself.
EmbeddingSet RandomSubset(const EmbeddingSet& set, double fraction_pct, std::uint64_t seed);

// Speakers shuffled with `seed`; whole speakers are appended until the row
// count first reaches floor(N * fraction / 100). Rows keep parent order.
EmbeddingSet SpeakerSubset(const EmbeddingSet& set, double fraction_pct, std::uint64_t seed);

// Keeps max(1, floor(S * fraction / 100)) shuffled speakers.
EmbeddingSet SpeakerCountSubset(const EmbeddingSet& set, double fraction_pct, std::uint64_t seed);

struct SweepOptions {
  MmdOptions mmd;
};

// Subsamples `gen` per fraction and repeat (seed + repeat) and scores each
// subset against the full `ref`. A median-heuristic sigma is resolved once
// on the full sets and held fixed across conditions (sigma_used stays 0
// when SMMD is not requested).
SweepCurve RunFractionSweep(const EmbeddingSet& ref, const EmbeddingSet& gen,
                            const SweepSpec& spec, const KernelSpec& kernel,
                            const SweepOptions& options = {});

// One FSD and one SMMD point per SNR, sorted by descending SNR. A median
// sigma is resolved on (ref, highest-SNR set) and held fixed.
SweepCurve RunSnrSweep(const std::map<double, EmbeddingSet>& per_condition, const EmbeddingSet& ref,
                       const KernelSpec& kernel, const SweepOptions& options = {});

// "a:b:s" (inclusive range) or "x,y,z".
std::vector<double> ParseRange(std::string_view text);

}  // namespace distmetric

#endif  // DISTMETRIC_SWEEP_H_
