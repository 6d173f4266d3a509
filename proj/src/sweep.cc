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

#include "sweep.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "error.h"
#include "gaussian_stats.h"
#include "json.hpp"
#include "random.h"

namespace distmetric {

std::string_view MetricName(Metric metric) { return metric == Metric::kFsd ? "fsd" : "smmd"; }

Metric ParseMetric(std::string_view name) {
  if (name == "fsd" || name == "FSD") return Metric::kFsd;
  if (name == "smmd" || name == "SMMD") return Metric::kSmmd;
  Fail(ErrorCode::kFormat, "unknown metric '" + std::string(name) + "'");
}

namespace {

void CheckFraction(double fraction_pct) {
  if (!(fraction_pct > 0.0 && fraction_pct <= 100.0)) {
    Fail(ErrorCode::kInvalidArgument, "fraction must be in (0, 100]");
  }
}

std::size_t TargetSize(std::size_t n, double fraction_pct) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction_pct / 100.0));
}

template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.Below(i)]);
  }
}

// Speaker ids in first-appearance order with their row indices.
std::vector<std::vector<std::size_t>> GroupBySpeaker(const EmbeddingSet& set) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < set.rows(); ++i) {
    const auto [it, inserted] = index.emplace(set.manifest()[i].speaker_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

EmbeddingSet CollectGroups(const EmbeddingSet& set,
                           const std::vector<std::vector<std::size_t>>& groups,
                           const std::vector<std::size_t>& chosen) {
  std::vector<std::size_t> rows;
  for (std::size_t g : chosen) rows.insert(rows.end(), groups[g].begin(), groups[g].end());
  std::sort(rows.begin(), rows.end());
  if (rows.size() < 2) {
    Fail(ErrorCode::kInsufficientSamples, "subset has fewer than 2 rows");
  }
  return set.Subset(rows);
}

std::string FormatNumber(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

EmbeddingSet RandomSubset(const EmbeddingSet& set, double fraction_pct, std::uint64_t seed) {
  CheckFraction(fraction_pct);
  const std::size_t n = set.rows();
  if (fraction_pct == 100.0) {
    if (n < 2) Fail(ErrorCode::kInsufficientSamples, "subset has fewer than 2 rows");
    return set;
  }
  const std::size_t k = std::max<std::size_t>(TargetSize(n, fraction_pct), 2);
  if (k > n) Fail(ErrorCode::kInsufficientSamples, "subset has fewer than 2 rows");
  // Partial Fisher-Yates: the first k slots hold a uniform k-subset.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(perm[i], perm[i + rng.Below(n - i)]);
  }
  perm.resize(k);
  std::sort(perm.begin(), perm.end());
  return set.Subset(perm);
}

EmbeddingSet SpeakerSubset(const EmbeddingSet& set, double fraction_pct, std::uint64_t seed) {
  CheckFraction(fraction_pct);
  if (fraction_pct == 100.0) return RandomSubset(set, 100.0, seed);
  const auto groups = GroupBySpeaker(set);
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  Shuffle(order, rng);
  const std::size_t target = TargetSize(set.rows(), fraction_pct);
  std::vector<std::size_t> chosen;
  std::size_t count = 0;
  for (std::size_t g : order) {
    chosen.push_back(g);
    count += groups[g].size();
    if (count >= target) break;
  }
  return CollectGroups(set, groups, chosen);
}

EmbeddingSet SpeakerCountSubset(const EmbeddingSet& set, double fraction_pct, std::uint64_t seed) {
  CheckFraction(fraction_pct);
  if (fraction_pct == 100.0) return RandomSubset(set, 100.0, seed);
  const auto groups = GroupBySpeaker(set);
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  Shuffle(order, rng);
  const std::size_t keep = std::max<std::size_t>(TargetSize(groups.size(), fraction_pct), 1);
  order.resize(keep);
  return CollectGroups(set, groups, order);
}

SweepCurve RunFractionSweep(const EmbeddingSet& ref, const EmbeddingSet& gen,
                            const SweepSpec& spec, const KernelSpec& kernel,
                            const SweepOptions& options) {
  if (spec.strategy == SweepStrategy::kSnrLadder) {
    Fail(ErrorCode::kInvalidArgument, "fraction sweep needs a fraction strategy");
  }
  if (spec.fractions.empty()) Fail(ErrorCode::kInvalidArgument, "sweep has no conditions");
  for (std::size_t i = 0; i < spec.fractions.size(); ++i) {
    CheckFraction(spec.fractions[i]);
    if (i > 0 && !(spec.fractions[i] > spec.fractions[i - 1])) {
      Fail(ErrorCode::kInvalidArgument, "fractions must be strictly increasing");
    }
  }
  if (spec.repeats < 1) Fail(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  if (ref.cols() != gen.cols()) Fail(ErrorCode::kDimension, "embedding dimensions differ");
  if (spec.metrics.empty()) Fail(ErrorCode::kInvalidArgument, "sweep has no metrics");
  const auto wants = [&](Metric m) {
    return std::find(spec.metrics.begin(), spec.metrics.end(), m) != spec.metrics.end();
  };
  const bool with_fsd = wants(Metric::kFsd);
  const bool with_smmd = wants(Metric::kSmmd);

  SweepCurve curve;
  KernelSpec fixed = kernel;
  if (with_smmd) {
    curve.sigma_used = ResolveSigma(ref, gen, kernel, options.mmd);
    fixed = KernelSpec::Fixed(curve.sigma_used);
  }
  const GaussianStats ref_stats = EstimateStats(ref);

  for (double fraction : spec.fractions) {
    for (unsigned rep = 0; rep < spec.repeats; ++rep) {
      const std::uint64_t seed = spec.seed + rep;
      EmbeddingSet subset = [&] {
        switch (spec.strategy) {
          case SweepStrategy::kSpeakerFraction: return SpeakerSubset(gen, fraction, seed);
          case SweepStrategy::kSpeakerCountFraction:
            return SpeakerCountSubset(gen, fraction, seed);
          default: return RandomSubset(gen, fraction, seed);
        }
      }();
      const std::size_t speakers = subset.CountSpeakers();
      if (with_fsd) {
        const double fsd = ComputeFsd(ref_stats, EstimateStats(subset)).value;
        curve.points.push_back({fraction, Metric::kFsd, fsd, rep, subset.rows(), speakers});
      }
      if (with_smmd) {
        const double smmd = ComputeSmmd(ref, subset, fixed, options.mmd).value;
        curve.points.push_back({fraction, Metric::kSmmd, smmd, rep, subset.rows(), speakers});
      }
    }
  }
  std::stable_sort(curve.points.begin(), curve.points.end(), [](const auto& a, const auto& b) {
    return std::tie(a.condition, a.metric, a.repeat_index) <
           std::tie(b.condition, b.metric, b.repeat_index);
  });
  return curve;
}

SweepCurve RunSnrSweep(const std::map<double, EmbeddingSet>& per_condition,
                       const EmbeddingSet& ref, const KernelSpec& kernel,
                       const SweepOptions& options) {
  if (per_condition.size() < 2) {
    Fail(ErrorCode::kInvalidArgument, "SNR sweep needs at least 2 conditions");
  }
  for (const auto& [snr, set] : per_condition) {
    if (!std::isfinite(snr)) Fail(ErrorCode::kInvalidArgument, "SNR must be finite");
    if (set.cols() != ref.cols()) {
      Fail(ErrorCode::kDimension, "condition " + FormatNumber(snr) + " has dimension " +
                                      std::to_string(set.cols()) + ", reference has " +
                                      std::to_string(ref.cols()));
    }
  }
  SweepCurve curve;
  const EmbeddingSet& cleanest = per_condition.rbegin()->second;
  curve.sigma_used = ResolveSigma(ref, cleanest, kernel, options.mmd);
  const KernelSpec fixed = KernelSpec::Fixed(curve.sigma_used);
  const GaussianStats ref_stats = EstimateStats(ref);
  for (auto it = per_condition.rbegin(); it != per_condition.rend(); ++it) {
    const auto& [snr, set] = *it;
    const double fsd = ComputeFsd(ref_stats, EstimateStats(set)).value;
    const double smmd = ComputeSmmd(ref, set, fixed, options.mmd).value;
    const std::size_t speakers = set.CountSpeakers();
    curve.points.push_back({snr, Metric::kFsd, fsd, 0, set.rows(), speakers});
    curve.points.push_back({snr, Metric::kSmmd, smmd, 0, set.rows(), speakers});
  }
  return curve;
}

std::string SweepCurve::ToCsv() const {
  std::ostringstream out;
  out << "condition,metric,value,repeat,subset_size,n_speakers\n";
  for (const auto& p : points) {
    out << FormatNumber(p.condition) << ',' << MetricName(p.metric) << ','
        << FormatNumber(p.value) << ',' << p.repeat_index << ',' << p.subset_size << ','
        << p.n_speakers << '\n';
  }
  return out.str();
}

std::string SweepCurve::ToJson() const {
  nlohmann::ordered_json doc;
  doc["sigma_used"] = sigma_used;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& p : points) {
    nlohmann::ordered_json item;
    item["condition"] = p.condition;
    item["metric"] = MetricName(p.metric);
    item["value"] = p.value;
    item["repeat_index"] = p.repeat_index;
    item["subset_size"] = p.subset_size;
    item["n_speakers"] = p.n_speakers;
    list.push_back(std::move(item));
  }
  doc["points"] = std::move(list);
  return doc.dump(2);
}

std::vector<double> ParseRange(std::string_view text) {
  auto parse = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      Fail(ErrorCode::kInvalidArgument, "bad number '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const std::size_t a = text.find(':');
    const std::size_t b = text.find(':', a + 1);
    if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos) {
      Fail(ErrorCode::kInvalidArgument, "range must be START:STOP:STEP");
    }
    const double start = parse(text.substr(0, a));
    const double stop = parse(text.substr(a + 1, b - a - 1));
    const double step = parse(text.substr(b + 1));
    if (!(step > 0.0) || stop < start) {
      Fail(ErrorCode::kInvalidArgument, "range needs STEP > 0 and STOP >= START");
    }
    // Integer step counting avoids accumulating rounding error.
    const auto steps = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long i = 0; i <= steps; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse(text.substr(pos, end - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace distmetric
