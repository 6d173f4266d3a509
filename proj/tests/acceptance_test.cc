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

// Acceptance suite: one PASS/FAIL line per criterion, tolerances and
// runtime limits pinned below. Exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "analysis.h"
#include "audio_perturb.h"
#include "gaussian_stats.h"
#include "kernel_mmd.h"
#include "normality.h"
#include "sweep.h"
#include "test_util.h"

namespace {

namespace fs = std::filesystem;
using namespace distmetric;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string Fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

int failures = 0;

void Criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << Fmt(secs) << " s, limit "
            << limit_s << " s" << (in_time ? "" : ", TOO SLOW") << "]" << std::endl;
}

// tr sqrt(ab) from the eigenvalues of the nonsymmetric product.
double TraceSqrtOracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a * b);
  double total = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    total += std::sqrt(std::max(es.eigenvalues()[i].real(), 0.0));
  }
  return total;
}

double NaiveSmmd(const RowMatrix& r, const RowMatrix& g, double sigma) {
  auto k = [&](const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
    double d2 = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) d2 += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c));
    return std::exp(-d2 / (2.0 * sigma * sigma));
  };
  const Eigen::Index m = r.rows(), n = g.rows();
  long double rr = 0, gg = 0, rg = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j) rr += k(r, i, r, j);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) gg += k(g, i, g, j);
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) rg += k(r, i, g, j);
  }
  return static_cast<double>(rr / (m * (m - 1.0L)) + gg / (n * (n - 1.0L)) -
                             2.0L * rg / (static_cast<long double>(m) * n));
}

Outcome FsdClosedForm() {
  const std::size_t d = 16, n = 50000;
  Rng rng(2024);
  std::vector<double> mr(d), vr(d), mg(d), vg(d);
  double expected = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    mr[j] = rng.Gaussian();
    mg[j] = rng.Gaussian();
    vr[j] = 0.25 + 3.75 * rng.Uniform();
    vg[j] = 0.25 + 3.75 * rng.Uniform();
    expected += (mr[j] - mg[j]) * (mr[j] - mg[j]) +
                (std::sqrt(vr[j]) - std::sqrt(vg[j])) * (std::sqrt(vr[j]) - std::sqrt(vg[j]));
  }
  const EmbeddingSet r = testing::DiagonalGaussianSet(n, mr, vr, 1);
  const EmbeddingSet g = testing::DiagonalGaussianSet(n, mg, vg, 2);
  const double got = ComputeFsd(EstimateStats(r), EstimateStats(g)).value;
  const double rel = testing::RelErr(got, expected);
  return {rel <= 0.01, "fsd=" + Fmt(got) + " analytic=" + Fmt(expected) + " rel_err=" + Fmt(rel) + " (tol 1e-2)"};
}

Outcome FsdIdentity() {
  double worst = 0.0;
  for (std::size_t d : {2u, 16u, 128u, 768u}) {
    for (std::size_t n : {50u, 2000u}) {
      const GaussianStats s = EstimateStats(testing::GaussianSet(n, d, 100 + d + n, 0.5, 2.0));
      worst = std::max(worst, std::abs(ComputeFsd(s, s).value));
    }
  }
  return {worst <= 1e-8, "max fsd(s,s)=" + Fmt(worst) + " over D<=768, n<=2000 (tol 1e-8)"};
}

Outcome TraceOracle() {
  Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + rng.Below(32);
    auto spd = [&](std::uint64_t seed) {
      const RowMatrix b =
          testing::GenerateMatrix(d, d + 3, seed, [](Rng& r, std::size_t) { return r.Gaussian(); });
      return Eigen::MatrixXd(b * b.transpose() / static_cast<double>(d + 3));
    };
    const Eigen::MatrixXd a = spd(1000 + 2 * t), b = spd(1001 + 2 * t);
    worst = std::max(worst, testing::RelErr(TraceSqrtProduct(a, b), TraceSqrtOracle(a, b)));
  }
  return {worst <= 1e-8, "100 SPD pairs, max rel_err=" + Fmt(worst) + " (tol 1e-8)"};
}

Outcome SmmdOracle() {
  Rng rng(31);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = 2 + rng.Below(199), n = 2 + rng.Below(199), d = 1 + rng.Below(16);
    const EmbeddingSet r = testing::GaussianSet(m, d, 500 + t);
    const EmbeddingSet g = testing::GaussianSet(n, d, 600 + t, 0.25 * rng.Uniform(), 1.0 + 0.5 * rng.Uniform());
    const MmdResult res = ComputeSmmd(r, g, KernelSpec::MedianHeuristic());
    worst = std::max(worst, testing::RelErr(res.value, NaiveSmmd(r.data(), g.data(), res.sigma_used)));
  }
  const EmbeddingSet two = testing::FromRows({{0.0}, {1.0}});
  const double hand = ComputeSmmd(two, two, KernelSpec::Fixed(1.0)).value;
  const double hand_err = std::abs(hand - (std::exp(-0.5) - 1.0));
  return {worst <= 1e-10 && hand_err <= 1e-12,
          "50 instances max rel_err=" + Fmt(worst) + " (tol 1e-10); hand case err=" + Fmt(hand_err) +
              " (tol 1e-12)"};
}

Outcome NoiseMonotonicity() {
  const std::size_t n = 2000, d = 32;
  const EmbeddingSet ref = testing::GaussianSet(n, d, 1);
  const RowMatrix noise = testing::GenerateMatrix(n, d, 2, [](Rng& r, std::size_t) { return r.Gaussian(); });
  const GaussianStats sr = EstimateStats(ref);
  const KernelSpec kernel = KernelSpec::Fixed(ResolveSigma(ref, ref, KernelSpec::MedianHeuristic(), {}));
  std::vector<double> fsd, smmd;
  for (int k = 0; k <= 10; ++k) {
    const EmbeddingSet g(ref.data() + (0.1 * k) * noise, ref.manifest());
    fsd.push_back(ComputeFsd(sr, EstimateStats(g)).value);
    smmd.push_back(ComputeSmmd(ref, g, kernel).value);
  }
  int fsd_up = 0, smmd_up = 0;
  for (int k = 1; k <= 10; ++k) {
    fsd_up += fsd[k] > fsd[k - 1];
    smmd_up += smmd[k] >= smmd[k - 1];
  }
  return {fsd_up == 10 && smmd_up >= 9, "FSD increasing at " + std::to_string(fsd_up) +
                                            "/10 steps (need 10), SMMD nondecreasing at " +
                                            std::to_string(smmd_up) + "/10 (need 9)"};
}

Outcome SampleEfficiency() {
  const std::size_t n = 10000, d = 32, speakers = 20;
  const EmbeddingSet ref = testing::GaussianSet(n, d, 1);
  const EmbeddingSet gen = testing::GaussianSet(n, d, 2, 0.3, 1.2);
  SweepSpec spec;
  spec.fractions = {30, 100};
  spec.repeats = 5;
  spec.metrics = {Metric::kFsd};
  const SweepCurve curve = RunFractionSweep(ref, gen, spec, KernelSpec::MedianHeuristic());
  double at30 = 0.0, at100 = 0.0;
  for (const auto& p : curve.points) (p.condition == 30 ? at30 : at100) += p.value / spec.repeats;
  const double rel = testing::RelErr(at30, at100);

  // Speaker-structured data: per-speaker mean offsets plus within-speaker noise.
  const RowMatrix offsets =
      testing::GenerateMatrix(speakers, d, 3, [](Rng& r, std::size_t) { return r.Gaussian(); });
  auto grouped = [&](std::uint64_t seed) {
    RowMatrix x = testing::GenerateMatrix(n, d, seed, [](Rng& r, std::size_t) { return 0.5 * r.Gaussian(); });
    for (std::size_t i = 0; i < n; ++i) x.row(static_cast<Eigen::Index>(i)) += offsets.row(static_cast<Eigen::Index>(i % speakers));
    return EmbeddingSet(x, testing::MakeManifest(n, speakers));
  };
  SweepSpec by_speaker = spec;
  by_speaker.strategy = SweepStrategy::kSpeakerFraction;
  by_speaker.fractions = {5, 100};  // 500 of 10,000 rows is exactly one speaker
  const SweepCurve sc = RunFractionSweep(grouped(4), grouped(5), by_speaker, KernelSpec::MedianHeuristic());
  double full = 0.0;
  std::vector<double> single;
  bool one_speaker = true;
  for (const auto& p : sc.points) {
    if (p.condition == 100) {
      full = p.value;
      one_speaker = one_speaker && p.n_speakers == speakers;
    } else {
      single.push_back(p.value);
      one_speaker = one_speaker && p.n_speakers == 1;
    }
  }
  const bool exceeds = std::all_of(single.begin(), single.end(), [&](double v) { return v > full; });
  return {rel <= 0.10 && exceeds && one_speaker,
          "mean FSD@30%=" + Fmt(at30) + " vs @100%=" + Fmt(at100) + " rel=" + Fmt(rel) +
              " (tol 0.10); 1-speaker FSD min=" + Fmt(*std::min_element(single.begin(), single.end())) +
              " > 20-speaker FSD=" + Fmt(full)};
}

Outcome SnrExactness() {
  Rng rng(8);
  std::vector<AudioBuffer> clean(20);
  for (auto& a : clean) {
    a.sample_rate_hz = 16000;
    const std::size_t len = 500 + rng.Below(16000);
    const double amp = 0.01 + 0.5 * rng.Uniform();
    for (std::size_t i = 0; i < len; ++i) a.samples.push_back(amp * std::tanh(rng.Gaussian()));
  }
  double worst = 0.0, worst_remeasured = 0.0;
  bool identical = true;
  std::size_t mixes = 0;
  for (std::size_t f = 0; f < clean.size(); ++f) {
    for (int snr = 0; snr <= 50; snr += 5) {
      const MixResult a = MixAtSnr(clean[f], NoiseSource::Gaussian(), snr, FileSeed(42, std::to_string(f)));
      const MixResult b = MixAtSnr(clean[f], NoiseSource::Gaussian(), snr, FileSeed(42, std::to_string(f)));
      identical = identical && a.audio.samples == b.audio.samples;
      worst = std::max(worst, std::abs(a.achieved_snr_db - snr));
      if (a.clip_fraction == 0.0) {
        // Re-measure from the output: power of (mixed - clean) is the added noise.
        double pn = 0.0;
        for (std::size_t i = 0; i < clean[f].samples.size(); ++i) {
          const double dlt = a.audio.samples[i] - clean[f].samples[i];
          pn += dlt * dlt;
        }
        pn /= static_cast<double>(clean[f].samples.size());
        worst_remeasured =
            std::max(worst_remeasured, std::abs(10.0 * std::log10(MeasurePower(clean[f]) / pn) - snr));
      }
      ++mixes;
    }
  }
  return {worst <= 1e-9 && worst_remeasured <= 1e-9 && identical,
          std::to_string(mixes) + " mixes, max |achieved-target|=" + Fmt(worst) + " dB, re-measured " +
              Fmt(worst_remeasured) + " dB (tol 1e-9); repeat bit-identical=" + (identical ? "yes" : "no")};
}

Outcome NormalityCalibration() {
  const int seeds = 200;
  const std::size_t n = 500;
  const NormalityTest tests[] = {NormalityTest::kMardiaSkewness, NormalityTest::kMardiaKurtosis,
                                 NormalityTest::kHenzeZirkler};
  bool ok = true;
  std::string detail;
  for (std::size_t d : {1u, 2u, 5u}) {
    int null_rej[3] = {0, 0, 0}, alt_rej[3] = {0, 0, 0};
    for (int s = 0; s < seeds; ++s) {
      // Per-trial seeds named like per-file seeds: hash of (42, label).
      const std::string label = "d" + std::to_string(d) + "/s" + std::to_string(s);
      const EmbeddingSet normal = testing::GaussianSet(n, d, FileSeed(42, "normal/" + label));
      const EmbeddingSet expo = testing::ExponentialSet(n, d, FileSeed(42, "exponential/" + label));
      for (int t = 0; t < 3; ++t) {
        null_rej[t] += RunNormalityTest(tests[t], normal).p_value < 0.05;
        alt_rej[t] += RunNormalityTest(tests[t], expo).p_value < 0.05;
      }
    }
    detail += " d=" + std::to_string(d) + ":";
    for (int t = 0; t < 3; ++t) {
      const double null_rate = null_rej[t] / static_cast<double>(seeds);
      const double power = alt_rej[t] / static_cast<double>(seeds);
      ok = ok && null_rate >= 0.02 && null_rate <= 0.10 && power >= 0.95;
      detail += " " + std::string(NormalityTestName(tests[t])) + " null=" + Fmt(null_rate) + " power=" + Fmt(power);
    }
  }
  return {ok, "N=500, 200 seeds, null in [0.02,0.10], power >= 0.95;" + detail};
}

Outcome MosRankCorrelation() {
  const MosTable mos = ParseMosCsv(
      "system,mos,mos_ci\nReal,4.52,0.13\nXTTS,4.16,0.43\nYourTTS,3.75,0.28\nTacotron2,3.63,0.22\nVITS,4.25,0.11\n");
  const std::map<std::string, double> fsd = {
      {"Real", 0.16}, {"XTTS", 1.06}, {"YourTTS", 1.90}, {"Tacotron2", 2.58}, {"VITS", 2.44}};
  const std::map<std::string, double> smmd = {
      {"Real", 2.04}, {"XTTS", 2.20}, {"YourTTS", 4.39}, {"Tacotron2", 4.74}, {"VITS", 4.43}};
  // Hand ranks (ascending) in the order Real, XTTS, YourTTS, Tacotron2, VITS:
  // MOS 5,3,2,1,4; FSD 1,2,3,5,4; SMMD 1,2,3,5,4. Both d^2 totals are 34,
  // so rho = 1 - 6*34/(5*24) = -0.7.
  const double hand = 1.0 - 6.0 * 34.0 / (5.0 * 24.0);
  const double rho_fsd = Correlate(fsd, mos, CorrelationMethod::kSpearman).coefficient;
  const double rho_smmd = Correlate(smmd, mos, CorrelationMethod::kSpearman).coefficient;
  return {rho_fsd == -0.7 && std::abs(rho_smmd - hand) <= 1e-12,
          "Spearman(MOS, FSD)=" + Fmt(rho_fsd) + " (exact -0.7 required), Spearman(MOS, SMMD)=" +
              Fmt(rho_smmd) + " vs hand-rank " + Fmt(hand)};
}

std::string RunCli(const std::string& args) {
  const std::string cmd = std::string("'") + DISTMETRIC_CLI_PATH + "' " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return "";
  std::string out;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = ::pclose(pipe);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return "exit:" + std::to_string(status);
  return out;
}

Outcome CliThreadDeterminism() {
  testing::TempDir dir("acceptance_cli");
  // Several 1024-row blocks so that threads actually split the work.
  WriteEmbeddingSet(testing::GaussianSet(2500, 48, 1), dir / "r.npy", dir / "r.json");
  WriteEmbeddingSet(testing::GaussianSet(2300, 48, 2, 0.1), dir / "g.npy", dir / "g.json");
  const std::string pair = "--ref-matrix '" + (dir / "r.npy").string() + "' --ref-manifest '" +
                           (dir / "r.json").string() + "' --gen-matrix '" + (dir / "g.npy").string() +
                           "' --gen-manifest '" + (dir / "g.json").string() + "'";
  bool ok = true;
  std::string detail;
  for (const char* cmd : {"fsd", "smmd"}) {
    const std::string one = RunCli(std::string(cmd) + " " + pair + " --threads 1");
    const std::string eight = RunCli(std::string(cmd) + " " + pair + " --threads 8");
    const bool same = one == eight && one.rfind("{", 0) == 0;
    ok = ok && same;
    detail += std::string(detail.empty() ? "" : ", ") + cmd + (same ? " identical" : " DIFFERENT");
  }
  return {ok, detail + " at --threads 1 vs 8"};
}

}  // namespace

int main() {
  Criterion("fsd_closed_form", 10, FsdClosedForm);
  Criterion("fsd_identity", 30, FsdIdentity);
  Criterion("trace_sqrt_product_oracle", 5, TraceOracle);
  Criterion("smmd_oracle", 10, SmmdOracle);
  Criterion("noise_monotonicity", 30, NoiseMonotonicity);
  Criterion("sample_efficiency", 60, SampleEfficiency);
  Criterion("snr_mixing_exactness", 10, SnrExactness);
  Criterion("normality_calibration", 300, NormalityCalibration);
  Criterion("mos_rank_correlation", 1, MosRankCorrelation);
  Criterion("cli_thread_determinism", 60, CliThreadDeterminism);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
