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

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

struct SetHandle {
  dm_embedding_set* p = nullptr;
  ~SetHandle() { dm_embedding_set_destroy(p); }
};

struct ContextHandle {
  dm_context* p = nullptr;
  ContextHandle() { REQUIRE(dm_context_create(&p) == DM_OK); }
  ~ContextHandle() { dm_context_destroy(p); }
};

struct CurveHandle {
  dm_curve* p = nullptr;
  ~CurveHandle() { dm_curve_destroy(p); }
};

dm_status MakeSet(std::size_t rows, std::size_t cols, unsigned seed, double shift, SetHandle* out) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(shift, 1.0);
  std::vector<double> data(rows * cols);
  for (double& v : data) v = normal(gen);
  std::vector<std::string> utt, spk;
  for (std::size_t i = 0; i < rows; ++i) {
    utt.push_back("u" + std::to_string(i));
    spk.push_back("s" + std::to_string(i % 4));
  }
  std::vector<const char*> utt_c, spk_c;
  for (std::size_t i = 0; i < rows; ++i) {
    utt_c.push_back(utt[i].c_str());
    spk_c.push_back(spk[i].c_str());
  }
  return dm_embedding_set_create(rows, cols, data.data(), utt_c.data(), spk_c.data(), nullptr,
                                 &out->p);
}

TEST_CASE("status helpers") {
  CHECK(std::string(dm_version()).size() > 0);
  CHECK(std::string(dm_status_name(DM_OK)) == "OK");
  CHECK(dm_status_is_input_error(DM_ERR_FORMAT));
  CHECK(dm_status_is_input_error(DM_ERR_IO));
  CHECK_FALSE(dm_status_is_input_error(DM_ERR_NOT_PSD));
  CHECK_FALSE(dm_status_is_input_error(DM_OK));
}

TEST_CASE("embedding sets round trip through files") {
  SetHandle a;
  REQUIRE(MakeSet(20, 3, 1, 0.0, &a) == DM_OK);
  CHECK(dm_embedding_set_rows(a.p) == 20);
  CHECK(dm_embedding_set_cols(a.p) == 3);
  CHECK(dm_embedding_set_speakers(a.p) == 4);
  const fs::path dir = fs::temp_directory_path() / ("dm_capi_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string npy = (dir / "a.npy").string();
  const std::string json = (dir / "a.json").string();
  REQUIRE(dm_embedding_set_write(a.p, npy.c_str(), json.c_str(), DM_FLOAT64) == DM_OK);
  SetHandle b;
  REQUIRE(dm_embedding_set_read(npy.c_str(), json.c_str(), &b.p) == DM_OK);
  CHECK(std::memcmp(dm_embedding_set_data(a.p), dm_embedding_set_data(b.p), 60 * sizeof(double)) == 0);

  SetHandle missing;
  CHECK(dm_embedding_set_read((dir / "none.npy").c_str(), json.c_str(), &missing.p) == DM_ERR_IO);
  CHECK(std::string(dm_last_error()).find("none.npy") != std::string::npos);
  CHECK(missing.p == nullptr);
  fs::remove_all(dir);
}

TEST_CASE("create validates its input") {
  const double data[2] = {1.0, NAN};
  const char* ids[2] = {"a", "b"};
  const char* spk[2] = {"s", "s"};
  SetHandle s;
  CHECK(dm_embedding_set_create(2, 1, data, ids, spk, nullptr, &s.p) == DM_ERR_DATA);
  const char* dup[2] = {"a", "a"};
  const double ok[2] = {1.0, 2.0};
  CHECK(dm_embedding_set_create(2, 1, ok, dup, spk, nullptr, &s.p) == DM_ERR_CONSISTENCY);
  CHECK(dm_embedding_set_create(2, 1, nullptr, ids, spk, nullptr, &s.p) == DM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("metrics") {
  ContextHandle ctx;
  SetHandle a, b;
  REQUIRE(MakeSet(200, 4, 1, 0.0, &a) == DM_OK);
  REQUIRE(MakeSet(150, 4, 2, 0.5, &b) == DM_OK);

  dm_fsd_result self{};
  REQUIRE(dm_compute_fsd(ctx.p, a.p, a.p, &self) == DM_OK);
  CHECK(self.value <= 1e-8);
  dm_fsd_result ab{}, ba{};
  REQUIRE(dm_compute_fsd(ctx.p, a.p, b.p, &ab) == DM_OK);
  REQUIRE(dm_compute_fsd(ctx.p, b.p, a.p, &ba) == DM_OK);
  CHECK(ab.value > 0.5);
  CHECK(ab.value == doctest::Approx(ba.value).epsilon(1e-10));
  CHECK(ab.n_ref == 200);
  CHECK(ab.n_gen == 150);
  CHECK(ab.dim == 4);

  dm_kernel_spec median{1, 0.0};
  dm_smmd_result m1{}, m8{};
  REQUIRE(dm_compute_smmd(ctx.p, a.p, b.p, median, &m1) == DM_OK);
  REQUIRE(dm_context_set_threads(ctx.p, 8) == DM_OK);
  REQUIRE(dm_compute_smmd(ctx.p, a.p, b.p, median, &m8) == DM_OK);
  CHECK(m1.value == m8.value);
  double sigma = 0.0;
  REQUIRE(dm_median_heuristic_sigma(ctx.p, a.p, b.p, &sigma) == DM_OK);
  CHECK(sigma == m1.sigma_used);

  dm_kernel_spec bad{0, 0.0};
  CHECK(dm_compute_smmd(ctx.p, a.p, b.p, bad, &m1) == DM_ERR_DOMAIN);
  SetHandle wide;
  REQUIRE(MakeSet(10, 5, 3, 0.0, &wide) == DM_OK);
  CHECK(dm_compute_fsd(ctx.p, a.p, wide.p, &ab) == DM_ERR_DIMENSION);
  CHECK(dm_compute_fsd(ctx.p, nullptr, wide.p, &ab) == DM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("normality") {
  SetHandle a;
  REQUIRE(MakeSet(300, 2, 5, 0.0, &a) == DM_OK);
  dm_normality_report r{};
  REQUIRE(dm_normality_run(nullptr, a.p, DM_HENZE_ZIRKLER, 0, &r) == DM_OK);
  CHECK(r.test == DM_HENZE_ZIRKLER);
  CHECK(r.n == 300);
  CHECK(r.d == 2);
  CHECK(r.p_value >= 0.0);
  CHECK(r.p_value <= 1.0);
  CHECK(std::string(dm_normality_test_name(DM_MARDIA_KURTOSIS)) == "mardia_kurtosis");
  SetHandle tiny;
  REQUIRE(MakeSet(3, 2, 5, 0.0, &tiny) == DM_OK);
  CHECK(dm_normality_run(nullptr, tiny.p, DM_MARDIA_SKEWNESS, 0, &r) == DM_ERR_INSUFFICIENT_SAMPLES);
}

TEST_CASE("mixing") {
  std::vector<double> clean(1000), mixed(1000);
  for (std::size_t i = 0; i < clean.size(); ++i) clean[i] = 0.3 * std::sin(0.05 * static_cast<double>(i));
  dm_noise_spec spec{DM_NOISE_GAUSSIAN, nullptr, 15.0, 3};
  dm_mix_result r{};
  REQUIRE(dm_mix_at_snr(clean.data(), clean.size(), 16000, &spec, mixed.data(), &r) == DM_OK);
  CHECK(std::abs(r.achieved_snr_db - 15.0) <= 1e-9);
  CHECK(dm_measure_power(clean.data(), clean.size()) == doctest::Approx(0.045).epsilon(0.01));
  std::vector<double> silent(10, 0.0);
  CHECK(dm_mix_at_snr(silent.data(), silent.size(), 16000, &spec, mixed.data(), &r) ==
        DM_ERR_SILENT_SIGNAL);
  char* json = nullptr;
  CHECK(dm_perturb_corpus(nullptr, "/nonexistent-dir", "/tmp/x", &spec, 0, &json) == DM_ERR_IO);
}

TEST_CASE("sweeps and curves") {
  ContextHandle ctx;
  SetHandle ref, gen;
  REQUIRE(MakeSet(120, 3, 1, 0.0, &ref) == DM_OK);
  REQUIRE(MakeSet(120, 3, 2, 0.2, &gen) == DM_OK);
  double* fractions = nullptr;
  std::size_t count = 0;
  REQUIRE(dm_parse_range("50:100:50", &fractions, &count) == DM_OK);
  REQUIRE(count == 2);
  CurveHandle curve;
  dm_kernel_spec median{1, 0.0};
  REQUIRE(dm_run_fraction_sweep(ctx.p, ref.p, gen.p, DM_SWEEP_RANDOM, fractions, count, 2,
                                DM_METRIC_MASK_ALL, median, &curve.p) == DM_OK);
  CurveHandle fsd_only;
  REQUIRE(dm_run_fraction_sweep(ctx.p, ref.p, gen.p, DM_SWEEP_RANDOM, fractions, count, 2,
                                DM_METRIC_MASK_FSD, median, &fsd_only.p) == DM_OK);
  CHECK(dm_curve_size(fsd_only.p) == 4);
  CurveHandle bad_mask;
  CHECK(dm_run_fraction_sweep(ctx.p, ref.p, gen.p, DM_SWEEP_RANDOM, fractions, count, 2, 0, median,
                              &bad_mask.p) == DM_ERR_INVALID_ARGUMENT);
  dm_doubles_free(fractions);
  CHECK(dm_curve_size(curve.p) == 8);
  dm_curve_point last{};
  REQUIRE(dm_curve_point_at(curve.p, 7, &last) == DM_OK);
  CHECK(last.condition == 100.0);
  CHECK(last.metric == DM_METRIC_SMMD);
  CHECK(last.repeat_index == 1);
  CHECK(dm_curve_point_at(curve.p, 8, &last) == DM_ERR_INVALID_ARGUMENT);
  CHECK(dm_curve_sigma_used(curve.p) > 0.0);

  char* csv = nullptr;
  REQUIRE(dm_curve_to_csv(curve.p, &csv) == DM_OK);
  CHECK(std::string(csv).rfind("condition,metric,value,repeat,subset_size,n_speakers\n", 0) == 0);
  dm_string_free(csv);

  const double snrs[2] = {0.0, 20.0};
  const dm_embedding_set* sets[2] = {gen.p, ref.p};
  CurveHandle snr;
  REQUIRE(dm_run_snr_sweep(ctx.p, ref.p, snrs, sets, 2, median, &snr.p) == DM_OK);
  double top = 0.0;
  REQUIRE(dm_curve_max_condition(snr.p, &top) == DM_OK);
  CHECK(top == 20.0);
  CurveHandle rel;
  REQUIRE(dm_curve_relative_change(snr.p, 0.0, &rel.p) == DM_OK);
  dm_curve_point p{};
  REQUIRE(dm_curve_point_at(rel.p, 2, &p) == DM_OK);
  CHECK(p.condition == 0.0);
  CHECK(p.value == 1.0);
  CurveHandle none;
  CHECK(dm_curve_relative_change(snr.p, 7.0, &none.p) == DM_ERR_MISSING_CONDITION);
  CHECK(dm_run_snr_sweep(ctx.p, ref.p, snrs, sets, 1, median, &none.p) == DM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("correlation") {
  const char* systems[5] = {"Real", "XTTS", "YourTTS", "Tacotron2", "VITS"};
  const double fsd[5] = {0.16, 1.06, 1.90, 2.58, 2.44};
  const double mos[5] = {4.52, 4.16, 3.75, 3.63, 4.25};
  dm_correlation c{};
  REQUIRE(dm_correlate(systems, fsd, 5, systems, mos, 5, DM_SPEARMAN, 0, &c) == DM_OK);
  CHECK(c.coefficient == doctest::Approx(-0.7).epsilon(1e-14));
  CHECK(c.n == 5);
  CHECK(dm_correlate(systems, fsd, 2, systems, mos, 2, DM_SPEARMAN, 0, &c) == DM_ERR_INSUFFICIENT_DATA);
}

}  // namespace
