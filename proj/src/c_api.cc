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

#include "distmetric/distmetric.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "analysis.h"
#include "audio_perturb.h"
#include "error.h"
#include "gaussian_stats.h"
#include "kernel_mmd.h"
#include "normality.h"
#include "sweep.h"
#include "tensor_io.h"

struct dm_context {
  unsigned threads = 0;
  std::uint64_t seed = 42;
  std::size_t max_pairs = 100000;
};

struct dm_embedding_set {
  distmetric::EmbeddingSet set;
};

struct dm_curve {
  distmetric::SweepCurve curve;
};

namespace {

using distmetric::ErrorCode;

thread_local std::string g_last_error;

dm_status ToStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return DM_ERR_FORMAT;
    case ErrorCode::kConsistency: return DM_ERR_CONSISTENCY;
    case ErrorCode::kData: return DM_ERR_DATA;
    case ErrorCode::kIo: return DM_ERR_IO;
    case ErrorCode::kInsufficientSamples: return DM_ERR_INSUFFICIENT_SAMPLES;
    case ErrorCode::kDomain: return DM_ERR_DOMAIN;
    case ErrorCode::kNotPsd: return DM_ERR_NOT_PSD;
    case ErrorCode::kDimension: return DM_ERR_DIMENSION;
    case ErrorCode::kDegenerateData: return DM_ERR_DEGENERATE_DATA;
    case ErrorCode::kSingularCovariance: return DM_ERR_SINGULAR_COVARIANCE;
    case ErrorCode::kSilentSignal: return DM_ERR_SILENT_SIGNAL;
    case ErrorCode::kSilentNoise: return DM_ERR_SILENT_NOISE;
    case ErrorCode::kRateMismatch: return DM_ERR_RATE_MISMATCH;
    case ErrorCode::kEmptyCorpus: return DM_ERR_EMPTY_CORPUS;
    case ErrorCode::kDegenerateBaseline: return DM_ERR_DEGENERATE_BASELINE;
    case ErrorCode::kMissingCondition: return DM_ERR_MISSING_CONDITION;
    case ErrorCode::kInsufficientData: return DM_ERR_INSUFFICIENT_DATA;
    case ErrorCode::kInvalidArgument: return DM_ERR_INVALID_ARGUMENT;
  }
  return DM_ERR_INTERNAL;
}

template <typename F>
dm_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return DM_OK;
  } catch (const distmetric::Error& e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return DM_ERR_INTERNAL;
  }
}

void Require(bool condition, const char* what) {
  if (!condition) distmetric::Fail(ErrorCode::kInvalidArgument, what);
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

const dm_context& ContextOrDefault(const dm_context* ctx) {
  static const dm_context kDefault{};
  return ctx ? *ctx : kDefault;
}

distmetric::KernelSpec ToKernel(dm_kernel_spec spec) {
  return spec.median_heuristic ? distmetric::KernelSpec::MedianHeuristic()
                               : distmetric::KernelSpec::Fixed(spec.sigma);
}

distmetric::MmdOptions MmdOptions(const dm_context& ctx) {
  distmetric::MmdOptions o;
  o.threads = ctx.threads;
  o.seed = ctx.seed;
  o.max_pairs = ctx.max_pairs;
  return o;
}

distmetric::NoiseSpec ToNoiseSpec(const dm_noise_spec& spec) {
  distmetric::NoiseSpec s;
  s.source = spec.source == DM_NOISE_CORPUS ? distmetric::NoiseKind::kExternalCorpus
                                            : distmetric::NoiseKind::kGaussianUnit;
  if (spec.source == DM_NOISE_CORPUS) {
    Require(spec.corpus_dir != nullptr, "corpus noise needs a directory");
    s.corpus_dir = spec.corpus_dir;
  }
  s.snr_db = spec.snr_db;
  s.seed = spec.seed;
  return s;
}

void FillReport(const distmetric::NormalityReport& r, dm_normality_report* out) {
  out->test = static_cast<dm_normality_test>(r.test);
  out->statistic = r.statistic;
  out->p_value = r.p_value;
  out->log10_p = r.log10_p;
  out->moment = r.moment;
  out->n = r.n;
  out->d = r.d;
  out->floored_eigenvalues = r.floored_eigenvalues;
}

}  // namespace

extern "C" {

const char* dm_version(void) { return DISTMETRIC_VERSION_STRING; }

const char* dm_status_name(dm_status status) {
  switch (status) {
    case DM_OK: return "OK";
    case DM_ERR_INTERNAL: return "InternalError";
    default: break;
  }
  static const ErrorCode kCodes[] = {
      ErrorCode::kFormat,          ErrorCode::kConsistency,        ErrorCode::kData,
      ErrorCode::kIo,              ErrorCode::kInsufficientSamples, ErrorCode::kDomain,
      ErrorCode::kNotPsd,          ErrorCode::kDimension,          ErrorCode::kDegenerateData,
      ErrorCode::kSingularCovariance, ErrorCode::kSilentSignal,    ErrorCode::kSilentNoise,
      ErrorCode::kRateMismatch,    ErrorCode::kEmptyCorpus,        ErrorCode::kDegenerateBaseline,
      ErrorCode::kMissingCondition, ErrorCode::kInsufficientData,  ErrorCode::kInvalidArgument};
  const int index = static_cast<int>(status) - 1;
  if (index < 0 || index >= static_cast<int>(sizeof(kCodes) / sizeof(kCodes[0]))) {
    return "UnknownStatus";
  }
  return distmetric::ErrorCodeName(kCodes[index]).data();
}

int dm_status_is_input_error(dm_status status) {
  switch (status) {
    case DM_ERR_FORMAT:
    case DM_ERR_CONSISTENCY:
    case DM_ERR_DATA:
    case DM_ERR_IO:
    case DM_ERR_RATE_MISMATCH:
    case DM_ERR_EMPTY_CORPUS:
    case DM_ERR_INVALID_ARGUMENT:
      return 1;
    default:
      return 0;
  }
}

const char* dm_last_error(void) { return g_last_error.c_str(); }

void dm_string_free(char* s) { std::free(s); }

dm_status dm_context_create(dm_context** out) {
  return Guard([&] {
    Require(out != nullptr, "null output pointer");
    *out = new dm_context();
  });
}

void dm_context_destroy(dm_context* ctx) { delete ctx; }

dm_status dm_context_set_threads(dm_context* ctx, unsigned threads) {
  return Guard([&] {
    Require(ctx != nullptr, "null context");
    ctx->threads = threads;
  });
}

dm_status dm_context_set_seed(dm_context* ctx, uint64_t seed) {
  return Guard([&] {
    Require(ctx != nullptr, "null context");
    ctx->seed = seed;
  });
}

dm_status dm_context_set_max_pairs(dm_context* ctx, uint64_t max_pairs) {
  return Guard([&] {
    Require(ctx != nullptr, "null context");
    Require(max_pairs >= 1, "max_pairs must be >= 1");
    ctx->max_pairs = static_cast<std::size_t>(max_pairs);
  });
}

dm_status dm_embedding_set_read(const char* matrix_path, const char* manifest_path,
                                dm_embedding_set** out) {
  return Guard([&] {
    Require(matrix_path && manifest_path && out, "null argument");
    *out = new dm_embedding_set{distmetric::ReadEmbeddingSet(matrix_path, manifest_path)};
  });
}

dm_status dm_embedding_set_write(const dm_embedding_set* set, const char* matrix_path,
                                 const char* manifest_path, dm_precision precision) {
  return Guard([&] {
    Require(set && matrix_path && manifest_path, "null argument");
    distmetric::WriteEmbeddingSet(set->set, matrix_path, manifest_path,
                                  precision == DM_FLOAT32 ? distmetric::Precision::kFloat32
                                                          : distmetric::Precision::kFloat64);
  });
}

dm_status dm_embedding_set_create(size_t rows, size_t cols, const double* data,
                                  const char* const* utt_ids, const char* const* speaker_ids,
                                  const double* durations, dm_embedding_set** out) {
  return Guard([&] {
    Require(out && (rows * cols == 0 || (data && utt_ids && speaker_ids)), "null argument");
    distmetric::RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (rows * cols > 0) std::memcpy(m.data(), data, sizeof(double) * rows * cols);
    distmetric::Manifest manifest(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      Require(utt_ids[i] && speaker_ids[i], "null manifest string");
      manifest[i].utt_id = utt_ids[i];
      manifest[i].speaker_id = speaker_ids[i];
      if (durations && durations[i] >= 0.0) manifest[i].duration_s = durations[i];
    }
    *out = new dm_embedding_set{distmetric::EmbeddingSet(std::move(m), std::move(manifest))};
  });
}

void dm_embedding_set_destroy(dm_embedding_set* set) { delete set; }

size_t dm_embedding_set_rows(const dm_embedding_set* set) { return set ? set->set.rows() : 0; }
size_t dm_embedding_set_cols(const dm_embedding_set* set) { return set ? set->set.cols() : 0; }
size_t dm_embedding_set_speakers(const dm_embedding_set* set) {
  return set ? set->set.CountSpeakers() : 0;
}
const double* dm_embedding_set_data(const dm_embedding_set* set) {
  return set ? set->set.data().data() : nullptr;
}

dm_status dm_compute_fsd(const dm_context*, const dm_embedding_set* ref,
                         const dm_embedding_set* gen, dm_fsd_result* out) {
  return Guard([&] {
    Require(ref && gen && out, "null argument");
    if (ref->set.cols() != gen->set.cols()) {
      distmetric::Fail(ErrorCode::kDimension, "embedding dimensions differ: " +
                                                  std::to_string(ref->set.cols()) + " vs " +
                                                  std::to_string(gen->set.cols()));
    }
    const auto r = distmetric::ComputeFsd(distmetric::EstimateStats(ref->set),
                                          distmetric::EstimateStats(gen->set));
    out->value = r.value;
    out->raw_value = r.raw_value;
    out->n_ref = ref->set.rows();
    out->n_gen = gen->set.rows();
    out->dim = ref->set.cols();
  });
}

dm_status dm_compute_smmd(const dm_context* ctx, const dm_embedding_set* ref,
                          const dm_embedding_set* gen, dm_kernel_spec kernel,
                          dm_smmd_result* out) {
  return Guard([&] {
    Require(ref && gen && out, "null argument");
    const auto r = distmetric::ComputeSmmd(ref->set, gen->set, ToKernel(kernel),
                                           MmdOptions(ContextOrDefault(ctx)));
    out->value = r.value;
    out->sigma_used = r.sigma_used;
    out->m = r.m;
    out->n = r.n;
  });
}

dm_status dm_median_heuristic_sigma(const dm_context* ctx, const dm_embedding_set* ref,
                                    const dm_embedding_set* gen, double* sigma) {
  return Guard([&] {
    Require(ref && gen && sigma, "null argument");
    const dm_context& c = ContextOrDefault(ctx);
    *sigma = distmetric::MedianHeuristicSigma(ref->set, gen->set, c.max_pairs, c.seed);
  });
}

const char* dm_normality_test_name(dm_normality_test test) {
  return distmetric::NormalityTestName(static_cast<distmetric::NormalityTest>(test)).data();
}

dm_status dm_normality_run(const dm_context* ctx, const dm_embedding_set* set,
                           dm_normality_test test, int allow_pseudo_inverse,
                           dm_normality_report* out) {
  return Guard([&] {
    Require(set && out, "null argument");
    Require(test >= DM_MARDIA_SKEWNESS && test <= DM_HENZE_ZIRKLER, "unknown normality test");
    distmetric::NormalityOptions options;
    options.threads = ContextOrDefault(ctx).threads;
    options.allow_pseudo_inverse = allow_pseudo_inverse != 0;
    FillReport(distmetric::RunNormalityTest(static_cast<distmetric::NormalityTest>(test),
                                            set->set, options),
               out);
  });
}

double dm_measure_power(const double* samples, size_t count) {
  if (samples == nullptr) return 0.0;
  return distmetric::MeasurePower(std::span<const double>(samples, count));
}

dm_status dm_mix_at_snr(const double* clean, size_t count, uint32_t sample_rate_hz,
                        const dm_noise_spec* spec, double* mixed, dm_mix_result* out) {
  return Guard([&] {
    Require(clean && spec && mixed && out, "null argument");
    distmetric::AudioBuffer buffer;
    buffer.samples.assign(clean, clean + count);
    buffer.sample_rate_hz = sample_rate_hz;
    const auto r = distmetric::MixAtSnr(buffer, ToNoiseSpec(*spec));
    std::memcpy(mixed, r.audio.samples.data(), sizeof(double) * count);
    out->alpha = r.alpha;
    out->achieved_snr_db = r.achieved_snr_db;
    out->clip_fraction = r.clip_fraction;
  });
}

dm_status dm_perturb_corpus(const dm_context* ctx, const char* in_dir, const char* out_dir,
                            const dm_noise_spec* spec, int strict, char** report_json) {
  return Guard([&] {
    Require(in_dir && out_dir && spec && report_json, "null argument");
    distmetric::PerturbOptions options;
    options.strict = strict != 0;
    options.threads = ContextOrDefault(ctx).threads;
    const auto report = distmetric::PerturbCorpus(in_dir, out_dir, ToNoiseSpec(*spec), options);
    *report_json = CopyString(report.ToJson());
  });
}

dm_status dm_run_fraction_sweep(const dm_context* ctx, const dm_embedding_set* ref,
                                const dm_embedding_set* gen, dm_sweep_strategy strategy,
                                const double* fractions, size_t n_fractions, unsigned repeats,
                                unsigned metric_mask, dm_kernel_spec kernel, dm_curve** out) {
  return Guard([&] {
    Require(ref && gen && out && (fractions || n_fractions == 0), "null argument");
    const dm_context& c = ContextOrDefault(ctx);
    distmetric::SweepSpec spec;
    switch (strategy) {
      case DM_SWEEP_RANDOM: spec.strategy = distmetric::SweepStrategy::kRandomFraction; break;
      case DM_SWEEP_SPEAKER: spec.strategy = distmetric::SweepStrategy::kSpeakerFraction; break;
      case DM_SWEEP_SPEAKER_COUNT:
        spec.strategy = distmetric::SweepStrategy::kSpeakerCountFraction;
        break;
      default: distmetric::Fail(ErrorCode::kInvalidArgument, "unknown sweep strategy");
    }
    spec.fractions.assign(fractions, fractions + n_fractions);
    spec.repeats = repeats;
    spec.seed = c.seed;
    if (metric_mask == 0 || (metric_mask & ~DM_METRIC_MASK_ALL) != 0) {
      distmetric::Fail(ErrorCode::kInvalidArgument, "metric mask must select fsd and/or smmd");
    }
    spec.metrics.clear();
    if (metric_mask & DM_METRIC_MASK_FSD) spec.metrics.push_back(distmetric::Metric::kFsd);
    if (metric_mask & DM_METRIC_MASK_SMMD) spec.metrics.push_back(distmetric::Metric::kSmmd);
    distmetric::SweepOptions options;
    options.mmd = MmdOptions(c);
    *out = new dm_curve{
        distmetric::RunFractionSweep(ref->set, gen->set, spec, ToKernel(kernel), options)};
  });
}

dm_status dm_run_snr_sweep(const dm_context* ctx, const dm_embedding_set* ref,
                           const double* snrs_db, const dm_embedding_set* const* sets,
                           size_t n_conditions, dm_kernel_spec kernel, dm_curve** out) {
  return Guard([&] {
    Require(ref && out && (n_conditions == 0 || (snrs_db && sets)), "null argument");
    std::map<double, distmetric::EmbeddingSet> conditions;
    for (std::size_t i = 0; i < n_conditions; ++i) {
      Require(sets[i] != nullptr, "null condition set");
      if (!conditions.emplace(snrs_db[i], sets[i]->set).second) {
        distmetric::Fail(ErrorCode::kInvalidArgument, "duplicate SNR condition");
      }
    }
    distmetric::SweepOptions options;
    options.mmd = MmdOptions(ContextOrDefault(ctx));
    *out = new dm_curve{distmetric::RunSnrSweep(conditions, ref->set, ToKernel(kernel), options)};
  });
}

dm_status dm_curve_relative_change(const dm_curve* curve, double baseline_condition,
                                   dm_curve** out) {
  return Guard([&] {
    Require(curve && out, "null argument");
    *out = new dm_curve{distmetric::RelativeChange(curve->curve, baseline_condition)};
  });
}

dm_status dm_curve_max_condition(const dm_curve* curve, double* out) {
  return Guard([&] {
    Require(curve && out, "null argument");
    *out = distmetric::MaxCondition(curve->curve);
  });
}

size_t dm_curve_size(const dm_curve* curve) { return curve ? curve->curve.points.size() : 0; }

dm_status dm_curve_point_at(const dm_curve* curve, size_t index, dm_curve_point* out) {
  return Guard([&] {
    Require(curve && out, "null argument");
    Require(index < curve->curve.points.size(), "curve index out of range");
    const auto& p = curve->curve.points[index];
    out->condition = p.condition;
    out->metric = p.metric == distmetric::Metric::kFsd ? DM_METRIC_FSD : DM_METRIC_SMMD;
    out->value = p.value;
    out->repeat_index = p.repeat_index;
    out->subset_size = p.subset_size;
    out->n_speakers = p.n_speakers;
  });
}

double dm_curve_sigma_used(const dm_curve* curve) { return curve ? curve->curve.sigma_used : 0.0; }

dm_status dm_curve_to_csv(const dm_curve* curve, char** out) {
  return Guard([&] {
    Require(curve && out, "null argument");
    *out = CopyString(curve->curve.ToCsv());
  });
}

dm_status dm_curve_to_json(const dm_curve* curve, char** out) {
  return Guard([&] {
    Require(curve && out, "null argument");
    *out = CopyString(curve->curve.ToJson());
  });
}

void dm_curve_destroy(dm_curve* curve) { delete curve; }

dm_status dm_parse_range(const char* text, double** values, size_t* count) {
  return Guard([&] {
    Require(text && values && count, "null argument");
    const auto parsed = distmetric::ParseRange(text);
    auto* buffer = static_cast<double*>(std::malloc(sizeof(double) * std::max<std::size_t>(parsed.size(), 1)));
    if (buffer == nullptr) throw std::bad_alloc();
    std::copy(parsed.begin(), parsed.end(), buffer);
    *values = buffer;
    *count = parsed.size();
  });
}

void dm_doubles_free(double* values) { std::free(values); }

dm_status dm_correlate(const char* const* systems, const double* values, size_t n_values,
                       const char* const* mos_systems, const double* mos, size_t n_mos,
                       dm_correlation_method method, int case_insensitive,
                       dm_correlation* out) {
  return Guard([&] {
    Require(out && (n_values == 0 || (systems && values)) && (n_mos == 0 || (mos_systems && mos)),
            "null argument");
    std::map<std::string, double> metric;
    for (std::size_t i = 0; i < n_values; ++i) {
      if (!metric.emplace(systems[i], values[i]).second) {
        distmetric::Fail(ErrorCode::kConsistency, std::string("duplicate system '") + systems[i] + "'");
      }
    }
    distmetric::MosTable table;
    for (std::size_t i = 0; i < n_mos; ++i) table.rows.push_back({mos_systems[i], mos[i], std::nullopt});
    const auto m = method == DM_SPEARMAN ? distmetric::CorrelationMethod::kSpearman
                                         : distmetric::CorrelationMethod::kPearson;
    const auto r = distmetric::Correlate(metric, table, m, case_insensitive != 0);
    out->method = method;
    out->coefficient = r.coefficient;
    out->n = r.n;
  });
}

dm_status dm_correlate_files(const char* metrics_csv, const char* metric_name,
                             const char* mos_csv, dm_correlation_method method,
                             int case_insensitive, dm_correlation* out, char** metric_used) {
  return Guard([&] {
    Require(metrics_csv && mos_csv && out, "null argument");
    const auto metrics = distmetric::ReadMetricCsv(metrics_csv);
    const auto table = distmetric::ReadMosCsv(mos_csv);
    std::string name;
    if (metric_name != nullptr) {
      name = metric_name;
    } else if (metrics.size() == 1) {
      name = metrics.begin()->first;
    } else {
      distmetric::Fail(ErrorCode::kInvalidArgument,
                       "metrics file holds " + std::to_string(metrics.size()) +
                           " metrics; choose one");
    }
    const auto it = metrics.find(name);
    if (it == metrics.end()) {
      distmetric::Fail(ErrorCode::kInvalidArgument, "metric '" + name + "' not in " + metrics_csv);
    }
    const auto m = method == DM_SPEARMAN ? distmetric::CorrelationMethod::kSpearman
                                         : distmetric::CorrelationMethod::kPearson;
    const auto r = distmetric::Correlate(it->second, table, m, case_insensitive != 0);
    out->method = method;
    out->coefficient = r.coefficient;
    out->n = r.n;
    if (metric_used) *metric_used = CopyString(name);
  });
}

}  // extern "C"
