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

#ifndef DISTMETRIC_AUDIO_PERTURB_H_
#define DISTMETRIC_AUDIO_PERTURB_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "random.h"
#include "wav_io.h"

namespace distmetric {

enum class NoiseKind { kGaussianUnit, kExternalCorpus };

struct NoiseSpec {
  NoiseKind source = NoiseKind::kGaussianUnit;
  std::filesystem::path corpus_dir;  // kExternalCorpus only
  double snr_db = 0.0;
  std::uint64_t seed = 42;
};

double MeasurePower(std::span<const double> samples);
inline double MeasurePower(const AudioBuffer& audio) { return MeasurePower(audio.samples); }

// Supplies noise segments of a requested length: fresh N(0, 1) draws, or a
// seeded crop (or loop) of one file from a background-noise corpus.
class NoiseSource {
 public:
  static NoiseSource Gaussian();
  // Loads every readable .wav under `dir`; raises EmptyCorpus if none load.
  static NoiseSource FromCorpus(const std::filesystem::path& dir);
  static NoiseSource FromSpec(const NoiseSpec& spec);

  NoiseKind kind() const { return kind_; }
  std::size_t file_count() const { return files_ ? files_->size() : 0; }

  std::vector<double> Segment(std::size_t length, std::uint32_t sample_rate_hz, Rng& rng) const;

 private:
  struct NoiseFile {
    std::string name;
    AudioBuffer audio;
    double power = 0.0;
  };

  NoiseKind kind_ = NoiseKind::kGaussianUnit;
  std::shared_ptr<const std::vector<NoiseFile>> files_;
};

struct MixResult {
  AudioBuffer audio;  // clipped to [-1, 1]
  double alpha = 0.0;
  double achieved_snr_db = 0.0;  // measured before clipping
  double clip_fraction = 0.0;
};

// clean + alpha * noise with alpha = sqrt(P_clean / (P_noise * 10^(snr/10))).
MixResult MixAtSnr(const AudioBuffer& clean, const NoiseSource& noise, double snr_db,
                   std::uint64_t seed);
MixResult MixAtSnr(const AudioBuffer& clean, const NoiseSpec& spec);

// Per-file seed from the corpus seed and the file's relative name, so that
// results do not depend on directory listing order.
std::uint64_t FileSeed(std::uint64_t seed, std::string_view name);

struct PerturbFileResult {
  std::string name;
  bool ok = false;
  double achieved_snr_db = 0.0;
  double clip_fraction = 0.0;
  std::string error;
};

struct PerturbReport {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  std::vector<PerturbFileResult> files;  // sorted by name

  std::size_t failures() const;
  std::string ToJson() const;
};

struct PerturbOptions {
  bool strict = false;
  unsigned threads = 1;
};

// Mixes every .wav under in_dir (recursively) at spec.snr_db and writes a
// float32 file with the same relative path under out_dir.
PerturbReport PerturbCorpus(const std::filesystem::path& in_dir,
                            const std::filesystem::path& out_dir, const NoiseSpec& spec,
                            const PerturbOptions& options = {});
PerturbReport PerturbCorpus(const std::filesystem::path& in_dir,
                            const std::filesystem::path& out_dir, const NoiseSource& noise,
                            double snr_db, std::uint64_t seed, const PerturbOptions& options = {});

// Relative paths of .wav files under dir, sorted.
std::vector<std::string> ListWavFiles(const std::filesystem::path& dir);

}  // namespace distmetric

#endif  // DISTMETRIC_AUDIO_PERTURB_H_
