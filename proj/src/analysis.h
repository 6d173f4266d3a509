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

#ifndef DISTMETRIC_ANALYSIS_H_
#define DISTMETRIC_ANALYSIS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sweep.h"

namespace distmetric {

struct MosRow {
  std::string system;
  double mos = 0.0;
  std::optional<double> mos_ci;
};

struct MosTable {
  std::vector<MosRow> rows;
};

enum class CorrelationMethod { kPearson, kSpearman };

std::string_view CorrelationMethodName(CorrelationMethod method);

struct CorrelationResult {
  CorrelationMethod method = CorrelationMethod::kPearson;
  double coefficient = 0.0;
  std::size_t n = 0;
};

// Divides every value by the value of the same metric and repeat at
// `baseline_condition`.
SweepCurve RelativeChange(const SweepCurve& curve, double baseline_condition);

// Largest condition present in the curve (the cleanest SNR).
double MaxCondition(const SweepCurve& curve);

double Pearson(const std::vector<double>& x, const std::vector<double>& y);
// Pearson on average ranks (ties share the mean of their rank positions).
double Spearman(const std::vector<double>& x, const std::vector<double>& y);
std::vector<double> AverageRanks(const std::vector<double>& values);

// Joins on exact system name (or ASCII case-insensitively when asked).
CorrelationResult Correlate(const std::map<std::string, double>& metric_by_system,
                            const MosTable& mos, CorrelationMethod method,
                            bool case_insensitive = false);

// CSV with header system,mos[,mos_ci].
MosTable ParseMosCsv(const std::string& text);
MosTable ReadMosCsv(const std::filesystem::path& path);

// CSV with header system,metric,value. Returns metric -> (system -> value).
std::map<std::string, std::map<std::string, double>> ParseMetricCsv(const std::string& text);
std::map<std::string, std::map<std::string, double>> ReadMetricCsv(const std::filesystem::path& path);

}  // namespace distmetric

#endif  // DISTMETRIC_ANALYSIS_H_
