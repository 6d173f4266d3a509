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

#include "analysis.h"

#include <cmath>

#include "doctest.h"
#include "test_util.h"

namespace distmetric {
namespace {

using testing::CaughtCode;

SweepCurve Curve(const std::vector<std::pair<double, double>>& condition_values) {
  SweepCurve c;
  for (const auto& [cond, v] : condition_values) c.points.push_back({cond, Metric::kFsd, v, 0, 10, 1});
  return c;
}

std::vector<double> Values(const SweepCurve& c) {
  std::vector<double> v;
  for (const auto& p : c.points) v.push_back(p.value);
  return v;
}

MosTable FiveSystemMos() {
  return ParseMosCsv(
      "system,mos,mos_ci\n"
      "Real,4.52,0.13\nXTTS,4.16,0.43\nYourTTS,3.75,0.28\nTacotron2,3.63,0.22\nVITS,4.25,0.11\n");
}

// 1 - 6 sum d^2 / (n (n^2 - 1)) from rank lists written out by hand.
double HandRankSpearman(const std::vector<int>& rx, const std::vector<int>& ry) {
  int d2 = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = static_cast<double>(rx.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

TEST_CASE("relative change") {
  CHECK(Values(RelativeChange(Curve({{0, 2}, {5, 4}, {10, 8}}), 0)) == std::vector<double>{1, 2, 4});
  CHECK(Values(RelativeChange(Curve({{0, 3}, {5, 3}}), 5)) == std::vector<double>{1, 1});
  CHECK(CaughtCode([] { RelativeChange(Curve({{0, 0}, {5, 1}}), 0); }) == ErrorCode::kDegenerateBaseline);
  CHECK(CaughtCode([] { RelativeChange(Curve({{0, 1}}), 7); }) == ErrorCode::kMissingCondition);

  // Per metric and repeat; baseline points become exactly 1.
  SweepCurve mixed;
  mixed.points = {{50, Metric::kFsd, 0.3, 0, 5, 1},  {50, Metric::kFsd, 0.7, 1, 5, 1},
                  {50, Metric::kSmmd, 0.1, 0, 5, 1}, {0, Metric::kFsd, 0.9, 0, 5, 1},
                  {0, Metric::kFsd, 1.4, 1, 5, 1},   {0, Metric::kSmmd, 0.3, 0, 5, 1}};
  const SweepCurve rel = RelativeChange(mixed, MaxCondition(mixed));
  CHECK(MaxCondition(mixed) == 50.0);
  CHECK(rel.points[0].value == 1.0);
  CHECK(rel.points[1].value == 1.0);
  CHECK(rel.points[2].value == 1.0);
  CHECK(rel.points[3].value == doctest::Approx(3.0));
  CHECK(rel.points[4].value == doctest::Approx(2.0));
  CHECK(rel.points[5].value == doctest::Approx(3.0));
  CHECK(Values(RelativeChange(rel, 50)) == Values(rel));
}

TEST_CASE("correlation extremes and symmetry") {
  const std::vector<double> x = {1.0, 2.5, 3.0, 4.75, 5.0};
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  CHECK(Pearson(x, x) == doctest::Approx(1.0));
  CHECK(Spearman(x, x) == 1.0);
  CHECK(Pearson(x, neg) == doctest::Approx(-1.0));
  CHECK(Spearman(x, neg) == -1.0);
  const std::vector<double> y = {2.0, 1.0, 4.0, 3.0, 7.0};
  CHECK(Pearson(x, y) == Pearson(y, x));
  CHECK(Spearman(x, y) == Spearman(y, x));
  CHECK(std::abs(Pearson(x, y)) <= 1.0);
}

TEST_CASE("Pearson matches a textbook evaluation") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2, 4, 5, 4, 5};
  // sxy = 6, sxx = 10, syy = 6
  CHECK(Pearson(x, y) == doctest::Approx(6.0 / std::sqrt(60.0)).epsilon(1e-14));
}

TEST_CASE("average ranks share ties") {
  CHECK(AverageRanks({10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
  CHECK(Spearman({1, 2, 2, 3}, {1, 2, 3, 4}) == doctest::Approx(0.9486832980505138));
}

TEST_CASE("Spearman is invariant under monotone transforms") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a, b, ea, cb;
    for (int i = 0; i < 12; ++i) {
      a.push_back(rng.Gaussian());
      b.push_back(a.back() + rng.Gaussian());
      ea.push_back(std::exp(a.back()));
      cb.push_back(b.back() * b.back() * b.back());
    }
    CHECK(Spearman(ea, cb) == doctest::Approx(Spearman(a, b)).epsilon(1e-14));
  }
}

TEST_CASE("MOS against FSD and SMMD of the five systems") {
  const MosTable mos = FiveSystemMos();
  const std::map<std::string, double> fsd = {
      {"Real", 0.16}, {"XTTS", 1.06}, {"YourTTS", 1.90}, {"Tacotron2", 2.58}, {"VITS", 2.44}};
  const std::map<std::string, double> smmd = {
      {"Real", 2.04}, {"XTTS", 2.20}, {"YourTTS", 4.39}, {"Tacotron2", 4.74}, {"VITS", 4.43}};
  // Ascending ranks in the order Real, XTTS, YourTTS, Tacotron2, VITS.
  const std::vector<int> mos_ranks = {5, 3, 2, 1, 4};
  const std::vector<int> fsd_ranks = {1, 2, 3, 5, 4};
  const std::vector<int> smmd_ranks = {1, 2, 3, 5, 4};
  CHECK(HandRankSpearman(mos_ranks, fsd_ranks) == doctest::Approx(-0.7).epsilon(1e-15));

  const CorrelationResult r = Correlate(fsd, mos, CorrelationMethod::kSpearman);
  CHECK(r.n == 5);
  CHECK(r.coefficient == doctest::Approx(-0.7).epsilon(1e-14));
  CHECK(r.coefficient == doctest::Approx(HandRankSpearman(mos_ranks, fsd_ranks)).epsilon(1e-14));
  CHECK(Correlate(smmd, mos, CorrelationMethod::kSpearman).coefficient ==
        doctest::Approx(HandRankSpearman(mos_ranks, smmd_ranks)).epsilon(1e-14));
  CHECK(Correlate(fsd, mos, CorrelationMethod::kPearson).coefficient < 0.0);
}

TEST_CASE("joining systems") {
  const MosTable mos = FiveSystemMos();
  const std::map<std::string, double> lower = {{"real", 1}, {"xtts", 2}, {"yourtts", 3}};
  CHECK(CaughtCode([&] { Correlate(lower, mos, CorrelationMethod::kSpearman); }) ==
        ErrorCode::kInsufficientData);
  CHECK(Correlate(lower, mos, CorrelationMethod::kSpearman, true).n == 3);
  const std::map<std::string, double> flat = {{"Real", 1}, {"XTTS", 1}, {"VITS", 1}};
  CHECK(CaughtCode([&] { Correlate(flat, mos, CorrelationMethod::kPearson); }) ==
        ErrorCode::kDegenerateData);
}

TEST_CASE("CSV inputs") {
  const MosTable mos = FiveSystemMos();
  REQUIRE(mos.rows.size() == 5);
  CHECK(mos.rows[0].mos_ci == 0.13);
  const MosTable bare = ParseMosCsv("# comment\nsystem,mos\nA,3.5\n\nB,4\n");
  CHECK(bare.rows.size() == 2);
  CHECK_FALSE(bare.rows[1].mos_ci.has_value());
  CHECK(CaughtCode([] { ParseMosCsv("system,mos\nA,6\n"); }) == ErrorCode::kData);
  CHECK(CaughtCode([] { ParseMosCsv("system,mos\nA,x\n"); }) == ErrorCode::kFormat);
  CHECK(CaughtCode([] { ParseMosCsv("name,score\nA,3\n"); }) == ErrorCode::kFormat);
  CHECK(CaughtCode([] { ParseMosCsv("system,mos\nA,3\nA,4\n"); }) == ErrorCode::kConsistency);

  const auto metrics = ParseMetricCsv("system,metric,value\nA,fsd,1.5\nB,fsd,2\nA,smmd,-0.1\n");
  CHECK(metrics.size() == 2);
  CHECK(metrics.at("fsd").at("B") == 2.0);
  CHECK(metrics.at("smmd").at("A") == -0.1);
  CHECK(CaughtCode([] { ParseMetricCsv("system,metric,value\nA,fsd,1\nA,fsd,2\n"); }) ==
        ErrorCode::kConsistency);
  CHECK(CaughtCode([] { ReadMosCsv("/nonexistent-dir/mos.csv"); }) == ErrorCode::kIo);
}

}  // namespace
}  // namespace distmetric
