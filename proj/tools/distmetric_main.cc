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

// Command-line front end over the distmetric C API.
//
//   distmetric fsd        --ref-matrix R.npy --ref-manifest R.json --gen-matrix G.npy ...
//   distmetric smmd       ... --sigma median|VALUE
//   distmetric normality  --matrix X.npy --manifest X.json --test all
//   distmetric perturb    --in CLEAN --out NOISY --noise gaussian --snr-ladder 0:50:5
//   distmetric sweep      --strategy random --fractions 10:100:10 ...
//   distmetric snr-curve  --ref-matrix ... --condition 50=g50.npy --condition 0=g0.npy
//   distmetric correlate  --metrics metrics.csv --mos mos.csv --method spearman
//
// Exit codes: 0 success, 1 computation error, 2 usage or input error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "distmetric/distmetric.h"
#include "json.hpp"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitCompute = 1;
constexpr int kExitUsage = 2;

// Thrown to unwind with a specific exit code after printing a diagnostic.
struct ExitError {
  int code;
  std::string message;
};

[[noreturn]] void UsageError(const std::string& message) { throw ExitError{kExitUsage, message}; }

void Check(dm_status status) {
  if (status == DM_OK) return;
  throw ExitError{dm_status_is_input_error(status) ? kExitUsage : kExitCompute, dm_last_error()};
}

struct SetDeleter {
  void operator()(dm_embedding_set* s) const { dm_embedding_set_destroy(s); }
};
struct CurveDeleter {
  void operator()(dm_curve* c) const { dm_curve_destroy(c); }
};
struct ContextDeleter {
  void operator()(dm_context* c) const { dm_context_destroy(c); }
};
struct StringDeleter {
  void operator()(char* s) const { dm_string_free(s); }
};
using SetPtr = std::unique_ptr<dm_embedding_set, SetDeleter>;
using CurvePtr = std::unique_ptr<dm_curve, CurveDeleter>;
using ContextPtr = std::unique_ptr<dm_context, ContextDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

SetPtr LoadSet(const std::string& matrix, const std::string& manifest) {
  dm_embedding_set* raw = nullptr;
  Check(dm_embedding_set_read(matrix.c_str(), manifest.c_str(), &raw));
  return SetPtr(raw);
}

// Manifest path next to a matrix: foo.npy -> foo.json.
std::string SiblingManifest(const std::string& matrix) {
  std::filesystem::path p(matrix);
  p.replace_extension(".json");
  return p.string();
}

std::string FormatNumber(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

// Label for ladder subdirectories: snr_0, snr_5, snr_2.5, snr_-5.
std::string SnrLabel(double snr) {
  if (snr == std::floor(snr) && std::abs(snr) < 1e15) {
    return std::to_string(static_cast<long long>(snr));
  }
  std::ostringstream out;
  out << snr;
  return out.str();
}

struct Common {
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::string format = "json";
  std::string command_line;
};

ContextPtr MakeContext(const Common& common) {
  dm_context* raw = nullptr;
  Check(dm_context_create(&raw));
  ContextPtr ctx(raw);
  Check(dm_context_set_seed(ctx.get(), common.seed));
  Check(dm_context_set_threads(ctx.get(), common.threads));
  return ctx;
}

void AddProvenance(Json& doc, const Common& common) {
  doc["seed"] = common.seed;
  doc["tool"] = "distmetric";
  doc["version"] = dm_version();
  doc["command_line"] = common.command_line;
}

std::string ProvenanceComment(const Common& common, std::optional<double> sigma) {
  std::string out = "# tool=distmetric version=" + std::string(dm_version()) + "\n";
  out += "# command_line=" + common.command_line + "\n";
  out += "# seed=" + std::to_string(common.seed);
  if (sigma) out += " sigma_used=" + FormatNumber(*sigma);
  out += "\n";
  return out;
}

void EmitScalar(const Json& doc, const Common& common) {
  if (common.format == "text") {
    for (const auto& [key, value] : doc.items()) {
      std::cout << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
                << "\n";
    }
  } else {
    std::cout << doc.dump(2) << "\n";
  }
}

void EmitCurve(const dm_curve* curve, const Common& common) {
  char* raw = nullptr;
  if (common.format == "json") {
    Check(dm_curve_to_json(curve, &raw));
    StringPtr text(raw);
    Json doc = Json::parse(text.get());
    AddProvenance(doc, common);
    std::cout << doc.dump(2) << "\n";
  } else {
    Check(dm_curve_to_csv(curve, &raw));
    StringPtr text(raw);
    std::cout << ProvenanceComment(common, dm_curve_sigma_used(curve)) << text.get();
  }
}

dm_kernel_spec ParseSigma(const std::string& text) {
  dm_kernel_spec spec{1, 0.0};
  if (text == "median") return spec;
  double sigma = 0.0;
  try {
    std::size_t used = 0;
    sigma = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    UsageError("--sigma must be 'median' or a positive number, got '" + text + "'");
  }
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    UsageError("--sigma must be > 0, got '" + text + "'");
  }
  spec.median_heuristic = 0;
  spec.sigma = sigma;
  return spec;
}

std::vector<double> ParseRangeOrFail(const std::string& text, const char* flag) {
  double* values = nullptr;
  std::size_t count = 0;
  if (dm_parse_range(text.c_str(), &values, &count) != DM_OK) {
    UsageError(std::string(flag) + ": " + dm_last_error());
  }
  std::vector<double> out(values, values + count);
  dm_doubles_free(values);
  return out;
}

// Command line with execution-only flags (--threads) removed, so it can be
// recorded in outputs that must not depend on the worker count.
std::string RecordedCommandLine(int argc, char** argv) {
  std::string out = "distmetric";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--threads") {
      ++i;
      continue;
    }
    if (arg.rfind("--threads=", 0) == 0) continue;
    out += " " + arg;
  }
  return out;
}

unsigned DefaultThreads() {
  if (const char* env = std::getenv("DISTMETRIC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "distmetric: ignoring invalid DISTMETRIC_THREADS='" << env << "'\n";
  }
  return 0;
}

struct PairArgs {
  std::string ref_matrix, ref_manifest, gen_matrix, gen_manifest;
};

void AddPairOptions(CLI::App* cmd, PairArgs& args) {
  cmd->add_option("--ref-matrix", args.ref_matrix, "Reference embeddings (.npy)")->required();
  cmd->add_option("--ref-manifest", args.ref_manifest, "Reference manifest (.json)")->required();
  cmd->add_option("--gen-matrix", args.gen_matrix, "Generated embeddings (.npy)")->required();
  cmd->add_option("--gen-manifest", args.gen_manifest, "Generated manifest (.json)")->required();
}

void AddCommonOptions(CLI::App* cmd, Common& common, std::vector<std::string> formats) {
  cmd->add_option("--seed", common.seed, "Seed for every random draw")->capture_default_str();
  cmd->add_option("--threads", common.threads,
                  "Worker threads (0 = all cores; default from DISTMETRIC_THREADS)");
  std::string help = "Output format:";
  for (const auto& f : formats) help += " " + f;
  help += " (default " + formats.front() + ")";
  cmd->add_option("--format", common.format, help)->check(CLI::IsMember(formats));
}

int RunFsd(const PairArgs& args, const Common& common) {
  auto ctx = MakeContext(common);
  auto ref = LoadSet(args.ref_matrix, args.ref_manifest);
  auto gen = LoadSet(args.gen_matrix, args.gen_manifest);
  dm_fsd_result r{};
  Check(dm_compute_fsd(ctx.get(), ref.get(), gen.get(), &r));
  Json doc;
  doc["metric"] = "fsd";
  doc["value"] = r.value;
  doc["raw_value"] = r.raw_value;
  doc["n_ref"] = r.n_ref;
  doc["n_gen"] = r.n_gen;
  doc["dim"] = r.dim;
  AddProvenance(doc, common);
  EmitScalar(doc, common);
  return kExitOk;
}

int RunSmmd(const PairArgs& args, const std::string& sigma_text, std::uint64_t max_pairs,
            const Common& common) {
  const dm_kernel_spec kernel = ParseSigma(sigma_text);
  auto ctx = MakeContext(common);
  Check(dm_context_set_max_pairs(ctx.get(), max_pairs));
  auto ref = LoadSet(args.ref_matrix, args.ref_manifest);
  auto gen = LoadSet(args.gen_matrix, args.gen_manifest);
  dm_smmd_result r{};
  Check(dm_compute_smmd(ctx.get(), ref.get(), gen.get(), kernel, &r));
  Json doc;
  doc["metric"] = "smmd";
  doc["value"] = r.value;
  doc["sigma_used"] = r.sigma_used;
  doc["sigma_mode"] = kernel.median_heuristic ? "median" : "fixed";
  doc["n_ref"] = r.m;
  doc["n_gen"] = r.n;
  doc["dim"] = dm_embedding_set_cols(ref.get());
  AddProvenance(doc, common);
  EmitScalar(doc, common);
  return kExitOk;
}

Json ReportJson(const dm_normality_report& r) {
  Json doc;
  doc["test"] = dm_normality_test_name(r.test);
  doc["statistic"] = r.statistic;
  doc["p_value"] = r.p_value;
  doc["log10_p"] = r.log10_p;
  doc["moment"] = r.moment;
  doc["n"] = r.n;
  doc["d"] = r.d;
  doc["floored_eigenvalues"] = r.floored_eigenvalues;
  return doc;
}

int RunNormality(const std::string& matrix, const std::string& manifest, const std::string& test,
                 bool pinv, const Common& common) {
  std::vector<dm_normality_test> tests;
  if (test == "mardia-skew") {
    tests = {DM_MARDIA_SKEWNESS};
  } else if (test == "mardia-kurt") {
    tests = {DM_MARDIA_KURTOSIS};
  } else if (test == "hz") {
    tests = {DM_HENZE_ZIRKLER};
  } else {
    tests = {DM_MARDIA_SKEWNESS, DM_MARDIA_KURTOSIS, DM_HENZE_ZIRKLER};
  }
  auto ctx = MakeContext(common);
  auto set = LoadSet(matrix, manifest.empty() ? SiblingManifest(matrix) : manifest);
  Json results = Json::array();
  for (auto t : tests) {
    dm_normality_report r{};
    Check(dm_normality_run(ctx.get(), set.get(), t, pinv ? 1 : 0, &r));
    if (r.floored_eigenvalues > 0) {
      std::cerr << "distmetric: warning: " << r.floored_eigenvalues
                << " covariance eigenvalue(s) floored (pseudo-inverse)\n";
    }
    results.push_back(ReportJson(r));
  }
  if (common.format == "text") {
    for (const auto& r : results) {
      std::cout << r["test"].get<std::string>() << ": statistic=" << FormatNumber(r["statistic"])
                << " p=" << FormatNumber(r["p_value"]) << " log10_p="
                << FormatNumber(r["log10_p"]) << "\n";
    }
    return kExitOk;
  }
  Json doc;
  if (results.size() == 1) {
    doc = results[0];
  } else {
    doc["tests"] = results;
  }
  AddProvenance(doc, common);
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

int RunPerturb(const std::string& in_dir, const std::string& out_dir, const std::string& noise,
               std::optional<double> snr, const std::string& ladder, bool strict,
               const Common& common) {
  dm_noise_spec spec{};
  std::string corpus;
  if (noise == "gaussian") {
    spec.source = DM_NOISE_GAUSSIAN;
  } else if (noise.rfind("dir:", 0) == 0 && noise.size() > 4) {
    spec.source = DM_NOISE_CORPUS;
    corpus = noise.substr(4);
    spec.corpus_dir = corpus.c_str();
  } else {
    UsageError("--noise must be 'gaussian' or 'dir:PATH'");
  }
  spec.seed = common.seed;
  std::vector<double> levels;
  const bool ladder_mode = !snr.has_value();
  if (ladder_mode) {
    levels = ParseRangeOrFail(ladder, "--snr-ladder");
    // Earlier levels would otherwise be read back as input by later ones.
    std::error_code ec;
    const auto nested = std::filesystem::weakly_canonical(out_dir, ec).lexically_relative(
        std::filesystem::weakly_canonical(in_dir, ec));
    if (!ec && !nested.empty() && *nested.begin() != "..") {
      UsageError("--out must not be inside --in in ladder mode");
    }
  } else {
    levels = {*snr};
  }
  auto ctx = MakeContext(common);
  Json reports = Json::array();
  std::size_t failures = 0;
  for (double level : levels) {
    spec.snr_db = level;
    const std::filesystem::path target =
        ladder_mode ? std::filesystem::path(out_dir) / ("snr_" + SnrLabel(level))
                    : std::filesystem::path(out_dir);
    char* raw = nullptr;
    Check(dm_perturb_corpus(ctx.get(), in_dir.c_str(), target.string().c_str(), &spec,
                            strict ? 1 : 0, &raw));
    StringPtr text(raw);
    Json report = Json::parse(text.get());
    report["out_dir"] = target.string();
    failures += report["failures"].get<std::size_t>();
    reports.push_back(std::move(report));
  }
  if (failures > 0) {
    std::cerr << "distmetric: warning: " << failures << " file(s) failed; see report\n";
  }
  Json doc;
  doc["noise"] = noise;
  if (ladder_mode) {
    doc["ladder"] = reports;
  } else {
    for (auto& [key, value] : reports[0].items()) doc[key] = value;
  }
  AddProvenance(doc, common);
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

int RunSweep(const PairArgs& args, const std::string& strategy, const std::string& fractions,
             unsigned repeats, const std::string& metrics, const std::string& sigma_text,
             const Common& common) {
  dm_sweep_strategy s = DM_SWEEP_RANDOM;
  if (strategy == "speaker") s = DM_SWEEP_SPEAKER;
  if (strategy == "speaker-count") s = DM_SWEEP_SPEAKER_COUNT;
  const auto values = ParseRangeOrFail(fractions, "--fractions");
  const dm_kernel_spec kernel = ParseSigma(sigma_text);
  if (repeats < 1) UsageError("--repeats must be >= 1");
  unsigned mask = 0;
  std::stringstream names(metrics);
  for (std::string name; std::getline(names, name, ',');) {
    if (name == "fsd") {
      mask |= DM_METRIC_MASK_FSD;
    } else if (name == "smmd") {
      mask |= DM_METRIC_MASK_SMMD;
    } else {
      UsageError("--metrics takes a comma list of fsd and smmd, got '" + metrics + "'");
    }
  }
  if (mask == 0) UsageError("--metrics must name at least one metric");
  auto ctx = MakeContext(common);
  auto ref = LoadSet(args.ref_matrix, args.ref_manifest);
  auto gen = LoadSet(args.gen_matrix, args.gen_manifest);
  dm_curve* raw = nullptr;
  Check(dm_run_fraction_sweep(ctx.get(), ref.get(), gen.get(), s, values.data(), values.size(),
                              repeats, mask, kernel, &raw));
  CurvePtr curve(raw);
  EmitCurve(curve.get(), common);
  return kExitOk;
}

int RunSnrCurve(const std::string& ref_matrix, const std::string& ref_manifest,
                const std::vector<std::string>& conditions, const std::string& baseline,
                bool raw_values, const std::string& sigma_text, const Common& common) {
  const dm_kernel_spec kernel = ParseSigma(sigma_text);
  std::vector<double> snrs;
  std::vector<SetPtr> sets;
  std::vector<std::pair<std::string, std::string>> paths;
  for (const auto& c : conditions) {
    const auto eq = c.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == c.size()) {
      UsageError("--condition must be SNR=MATRIX[,MANIFEST], got '" + c + "'");
    }
    const auto snr = ParseRangeOrFail(c.substr(0, eq), "--condition");
    if (snr.size() != 1) UsageError("--condition needs a single SNR value");
    std::string matrix = c.substr(eq + 1);
    std::string manifest;
    if (const auto comma = matrix.find(','); comma != std::string::npos) {
      manifest = matrix.substr(comma + 1);
      matrix = matrix.substr(0, comma);
    } else {
      manifest = SiblingManifest(matrix);
    }
    snrs.push_back(snr[0]);
    paths.emplace_back(matrix, manifest);
  }
  if (snrs.size() < 2) UsageError("snr-curve needs at least 2 --condition entries");
  std::optional<double> baseline_value;
  if (baseline != "max-snr") {
    const auto b = ParseRangeOrFail(baseline, "--baseline");
    if (b.size() != 1) UsageError("--baseline must be 'max-snr' or one SNR value");
    baseline_value = b[0];
  }

  auto ctx = MakeContext(common);
  auto ref = LoadSet(ref_matrix, ref_manifest.empty() ? SiblingManifest(ref_matrix) : ref_manifest);
  for (const auto& [matrix, manifest] : paths) sets.push_back(LoadSet(matrix, manifest));
  std::vector<const dm_embedding_set*> handles;
  for (const auto& s : sets) handles.push_back(s.get());

  dm_curve* out = nullptr;
  Check(dm_run_snr_sweep(ctx.get(), ref.get(), snrs.data(), handles.data(), handles.size(), kernel,
                         &out));
  CurvePtr curve(out);
  if (!raw_values) {
    double base = 0.0;
    if (baseline_value) {
      base = *baseline_value;
    } else {
      Check(dm_curve_max_condition(curve.get(), &base));
    }
    dm_curve* rel = nullptr;
    Check(dm_curve_relative_change(curve.get(), base, &rel));
    curve.reset(rel);
  }
  EmitCurve(curve.get(), common);
  return kExitOk;
}

int RunCorrelate(const std::string& metrics, const std::string& mos, const std::string& method,
                 const std::string& metric, bool case_insensitive, const Common& common) {
  dm_correlation r{};
  char* used = nullptr;
  Check(dm_correlate_files(metrics.c_str(), metric.empty() ? nullptr : metric.c_str(), mos.c_str(),
                           method == "pearson" ? DM_PEARSON : DM_SPEARMAN,
                           case_insensitive ? 1 : 0, &r, &used));
  StringPtr used_name(used);
  Json doc;
  doc["method"] = method;
  doc["coefficient"] = r.coefficient;
  doc["n"] = r.n;
  doc["metric"] = used_name.get();
  AddProvenance(doc, common);
  EmitScalar(doc, common);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution distances between speech-embedding sets (FSD, SMMD), "
               "normality tests, noise perturbation, sweeps and MOS correlation."};
  app.set_version_flag("--version", std::string(dm_version()));
  app.require_subcommand(1);

  Common common;
  common.threads = DefaultThreads();
  common.command_line = RecordedCommandLine(argc, argv);

  PairArgs pair;

  auto* fsd = app.add_subcommand("fsd", "Frechet distance between Gaussian fits of two sets");
  AddPairOptions(fsd, pair);
  AddCommonOptions(fsd, common, {"json", "text"});

  std::string sigma = "median";
  std::uint64_t max_pairs = 100000;
  auto* smmd = app.add_subcommand("smmd", "Unbiased Gaussian-kernel MMD between two sets");
  AddPairOptions(smmd, pair);
  smmd->add_option("--sigma", sigma, "Kernel bandwidth: 'median' or a positive value")
      ->capture_default_str();
  smmd->add_option("--max-pairs", max_pairs, "Pair budget of the median heuristic")
      ->capture_default_str();
  AddCommonOptions(smmd, common, {"json", "text"});

  std::string matrix, manifest, test = "all";
  bool pinv = false;
  auto* normality = app.add_subcommand("normality", "Multivariate normality tests");
  normality->add_option("--matrix", matrix, "Embeddings (.npy)")->required();
  normality->add_option("--manifest", manifest, "Manifest (.json); default: next to the matrix");
  normality->add_option("--test", test, "mardia-skew, mardia-kurt, hz or all")
      ->check(CLI::IsMember({"mardia-skew", "mardia-kurt", "hz", "all"}))
      ->capture_default_str();
  normality->add_flag("--pinv", pinv, "Pseudo-invert near-singular covariances instead of failing");
  AddCommonOptions(normality, common, {"json", "text"});

  std::string in_dir, out_dir, noise = "gaussian", ladder = "0:50:5";
  std::optional<double> snr;
  bool strict = false;
  auto* perturb = app.add_subcommand("perturb", "Mix noise into a WAV corpus at target SNRs");
  perturb->add_option("--in", in_dir, "Clean corpus directory")->required();
  perturb->add_option("--out", out_dir, "Output directory")->required();
  perturb->add_option("--noise", noise, "'gaussian' or 'dir:PATH' (background-noise corpus)")
      ->capture_default_str();
  auto* snr_opt = perturb->add_option("--snr", snr, "Single target SNR in dB");
  perturb->add_option("--snr-ladder", ladder,
                      "START:STOP:STEP ladder; one snr_<dB> subdirectory per level")
      ->capture_default_str()
      ->excludes(snr_opt);
  perturb->add_flag("--strict", strict, "Abort on the first failing file");
  AddCommonOptions(perturb, common, {"json"});

  std::string strategy = "random", fractions = "10:100:10", sweep_metrics = "fsd,smmd";
  unsigned repeats = 5;
  auto* sweep = app.add_subcommand("sweep", "Sample-efficiency sweep over subset fractions");
  AddPairOptions(sweep, pair);
  sweep->add_option("--strategy", strategy, "random, speaker or speaker-count")
      ->check(CLI::IsMember({"random", "speaker", "speaker-count"}))
      ->capture_default_str();
  sweep->add_option("--fractions", fractions, "Percentages: START:STOP:STEP or a,b,c")
      ->capture_default_str();
  sweep->add_option("--repeats", repeats, "Draws per fraction (seeds seed..seed+repeats-1)")
      ->capture_default_str();
  sweep->add_option("--metrics", sweep_metrics, "Comma list of fsd, smmd")->capture_default_str();
  sweep->add_option("--sigma", sigma, "Kernel bandwidth: 'median' or a positive value")
      ->capture_default_str();
  AddCommonOptions(sweep, common, {"csv", "json"});

  std::string ref_matrix, ref_manifest, baseline = "max-snr";
  std::vector<std::string> conditions;
  bool raw_values = false;
  auto* snr_curve = app.add_subcommand("snr-curve", "FSD/SMMD per SNR condition, relative to a baseline");
  snr_curve->add_option("--ref-matrix", ref_matrix, "Reference embeddings (.npy)")->required();
  snr_curve->add_option("--ref-manifest", ref_manifest, "Reference manifest; default: next to the matrix");
  snr_curve->add_option("--condition", conditions, "SNR=MATRIX[,MANIFEST], repeatable")->required();
  snr_curve->add_option("--baseline", baseline, "'max-snr' or an SNR value")->capture_default_str();
  snr_curve->add_flag("--raw", raw_values, "Emit raw metric values instead of relative change");
  snr_curve->add_option("--sigma", sigma, "Kernel bandwidth: 'median' or a positive value")
      ->capture_default_str();
  AddCommonOptions(snr_curve, common, {"csv", "json"});

  std::string metrics_csv, mos_csv, method = "spearman", metric_name;
  bool case_insensitive = false;
  auto* correlate = app.add_subcommand("correlate", "Correlate per-system metric values with MOS");
  correlate->add_option("--metrics", metrics_csv, "CSV: system,metric,value")->required();
  correlate->add_option("--mos", mos_csv, "CSV: system,mos[,mos_ci]")->required();
  correlate->add_option("--method", method, "pearson or spearman")
      ->check(CLI::IsMember({"pearson", "spearman"}))
      ->capture_default_str();
  correlate->add_option("--metric", metric_name, "Metric to use when the file holds several");
  correlate->add_flag("--case-insensitive", case_insensitive, "Join system names ignoring case");
  AddCommonOptions(correlate, common, {"json", "text"});

  // Scalar commands default to JSON, curve commands to CSV.
  common.format.clear();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (common.format.empty()) {
    common.format = (sweep->parsed() || snr_curve->parsed()) ? "csv" : "json";
  }

  try {
    if (fsd->parsed()) return RunFsd(pair, common);
    if (smmd->parsed()) return RunSmmd(pair, sigma, max_pairs, common);
    if (normality->parsed()) return RunNormality(matrix, manifest, test, pinv, common);
    if (perturb->parsed()) {
      return RunPerturb(in_dir, out_dir, noise, snr, ladder, strict, common);
    }
    if (sweep->parsed()) return RunSweep(pair, strategy, fractions, repeats, sweep_metrics, sigma, common);
    if (snr_curve->parsed()) {
      return RunSnrCurve(ref_matrix, ref_manifest, conditions, baseline, raw_values, sigma, common);
    }
    if (correlate->parsed()) {
      return RunCorrelate(metrics_csv, mos_csv, method, metric_name, case_insensitive, common);
    }
  } catch (const ExitError& e) {
    std::cerr << "distmetric: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "distmetric: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitUsage;
}
