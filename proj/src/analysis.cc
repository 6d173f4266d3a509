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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "error.h"

namespace distmetric {

std::string_view CorrelationMethodName(CorrelationMethod method) {
  return method == CorrelationMethod::kPearson ? "pearson" : "spearman";
}

SweepCurve RelativeChange(const SweepCurve& curve, double baseline_condition) {
  std::map<std::pair<Metric, unsigned>, double> baseline;
  for (const auto& p : curve.points) {
    if (p.condition == baseline_condition) baseline[{p.metric, p.repeat_index}] = p.value;
  }
  if (baseline.empty()) {
    Fail(ErrorCode::kMissingCondition, "baseline condition not present in curve");
  }
  SweepCurve out = curve;
  for (auto& p : out.points) {
    const auto it = baseline.find({p.metric, p.repeat_index});
    if (it == baseline.end()) {
      Fail(ErrorCode::kMissingCondition, "no baseline point for metric " +
                                             std::string(MetricName(p.metric)) + ", repeat " +
                                             std::to_string(p.repeat_index));
    }
    if (it->second == 0.0) {
      Fail(ErrorCode::kDegenerateBaseline,
           "baseline value of " + std::string(MetricName(p.metric)) + " is zero");
    }
    p.value = p.condition == baseline_condition ? 1.0 : p.value / it->second;
  }
  return out;
}

double MaxCondition(const SweepCurve& curve) {
  if (curve.points.empty()) Fail(ErrorCode::kMissingCondition, "curve is empty");
  double best = curve.points.front().condition;
  for (const auto& p : curve.points) best = std::max(best, p.condition);
  return best;
}

double Pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) Fail(ErrorCode::kDimension, "correlation inputs differ in length");
  if (x.size() < 3) Fail(ErrorCode::kInsufficientData, "correlation needs at least 3 pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) Fail(ErrorCode::kDegenerateData, "zero variance in correlation input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> AverageRanks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return Pearson(AverageRanks(x), AverageRanks(y));
}

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    fields.push_back(Trim(std::string_view(line).substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return fields;
}

double ParseDouble(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    Fail(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

// Rows of a CSV whose header must match `expected` (the last `optional`
// columns may be absent). Blank lines and '#' comments are skipped.
std::vector<std::vector<std::string>> ReadTable(const std::string& text,
                                                const std::vector<std::string>& expected,
                                                std::size_t optional) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto fields = SplitLine(trimmed);
    if (columns == 0) {
      if (fields.size() < expected.size() - optional || fields.size() > expected.size() ||
          !std::equal(fields.begin(), fields.end(), expected.begin())) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        Fail(ErrorCode::kFormat, "expected CSV header '" + want + "'");
      }
      columns = fields.size();
      continue;
    }
    if (fields.size() != columns) {
      Fail(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(columns) + " fields");
    }
    fields.push_back(std::to_string(line_no));
    rows.push_back(std::move(fields));
  }
  if (columns == 0) Fail(ErrorCode::kFormat, "CSV has no header");
  return rows;
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

CorrelationResult Correlate(const std::map<std::string, double>& metric_by_system,
                            const MosTable& mos, CorrelationMethod method,
                            bool case_insensitive) {
  std::set<std::string> seen;
  for (const auto& row : mos.rows) {
    if (!seen.insert(case_insensitive ? Lower(row.system) : row.system).second) {
      Fail(ErrorCode::kConsistency, "duplicate MOS system '" + row.system + "'");
    }
  }
  std::map<std::string, double> metric_lookup;
  for (const auto& [system, value] : metric_by_system) {
    const std::string key = case_insensitive ? Lower(system) : system;
    if (!metric_lookup.emplace(key, value).second) {
      Fail(ErrorCode::kConsistency, "metric systems collide case-insensitively: '" + system + "'");
    }
  }
  std::vector<double> metric, scores;
  for (const auto& row : mos.rows) {
    const auto it = metric_lookup.find(case_insensitive ? Lower(row.system) : row.system);
    if (it == metric_lookup.end()) continue;
    metric.push_back(it->second);
    scores.push_back(row.mos);
  }
  if (metric.size() < 3) {
    Fail(ErrorCode::kInsufficientData,
         "only " + std::to_string(metric.size()) + " systems joined; need at least 3");
  }
  CorrelationResult result;
  result.method = method;
  result.n = metric.size();
  result.coefficient =
      method == CorrelationMethod::kPearson ? Pearson(metric, scores) : Spearman(metric, scores);
  return result;
}

MosTable ParseMosCsv(const std::string& text) {
  MosTable table;
  std::set<std::string> seen;
  for (const auto& f : ReadTable(text, {"system", "mos", "mos_ci"}, 1)) {
    const std::size_t line_no = std::stoul(f.back());
    MosRow row;
    row.system = f[0];
    if (row.system.empty()) Fail(ErrorCode::kFormat, "line " + f.back() + ": empty system");
    if (!seen.insert(row.system).second) {
      Fail(ErrorCode::kConsistency, "line " + f.back() + ": duplicate system '" + row.system + "'");
    }
    row.mos = ParseDouble(f[1], line_no);
    if (row.mos < 1.0 || row.mos > 5.0) {
      Fail(ErrorCode::kData, "line " + f.back() + ": MOS must lie in [1, 5]");
    }
    if (f.size() == 4 && !f[2].empty()) {
      row.mos_ci = ParseDouble(f[2], line_no);
      if (*row.mos_ci < 0.0) Fail(ErrorCode::kData, "line " + f.back() + ": negative mos_ci");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

MosTable ReadMosCsv(const std::filesystem::path& path) { return ParseMosCsv(ReadText(path)); }

std::map<std::string, std::map<std::string, double>> ParseMetricCsv(const std::string& text) {
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& f : ReadTable(text, {"system", "metric", "value"}, 0)) {
    const std::size_t line_no = std::stoul(f.back());
    if (f[0].empty() || f[1].empty()) {
      Fail(ErrorCode::kFormat, "line " + f.back() + ": empty system or metric");
    }
    if (!out[f[1]].emplace(f[0], ParseDouble(f[2], line_no)).second) {
      Fail(ErrorCode::kConsistency, "duplicate row for system '" + f[0] + "', metric '" + f[1] + "'");
    }
  }
  return out;
}

std::map<std::string, std::map<std::string, double>> ReadMetricCsv(
    const std::filesystem::path& path) {
  return ParseMetricCsv(ReadText(path));
}

}  // namespace distmetric
