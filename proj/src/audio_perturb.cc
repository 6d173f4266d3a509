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

#include "audio_perturb.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "error.h"
#include "json.hpp"
#include "pair_reduce.h"

namespace distmetric {

namespace fs = std::filesystem;

double MeasurePower(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  CompensatedSum acc;
  for (double s : samples) acc.Add(s * s);
  return acc.Value() / static_cast<double>(samples.size());
}

std::vector<std::string> ListWavFiles(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) Fail(ErrorCode::kIo, "not a directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext != ".wav") continue;
    names.push_back(fs::relative(entry.path(), dir).generic_string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

NoiseSource NoiseSource::Gaussian() { return NoiseSource(); }

NoiseSource NoiseSource::FromCorpus(const fs::path& dir) {
  auto files = std::make_shared<std::vector<NoiseFile>>();
  for (const auto& name : ListWavFiles(dir)) {
    try {
      NoiseFile f;
      f.name = name;
      f.audio = ReadWav(dir / name);
      f.power = MeasurePower(f.audio);
      files->push_back(std::move(f));
    } catch (const Error&) {
      // Unreadable noise files are skipped.
    }
  }
  if (files->empty()) Fail(ErrorCode::kEmptyCorpus, "no readable noise files in " + dir.string());
  NoiseSource source;
  source.kind_ = NoiseKind::kExternalCorpus;
  source.files_ = std::move(files);
  return source;
}

NoiseSource NoiseSource::FromSpec(const NoiseSpec& spec) {
  return spec.source == NoiseKind::kGaussianUnit ? Gaussian() : FromCorpus(spec.corpus_dir);
}

std::vector<double> NoiseSource::Segment(std::size_t length, std::uint32_t sample_rate_hz,
                                         Rng& rng) const {
  std::vector<double> out(length);
  if (kind_ == NoiseKind::kGaussianUnit) {
    for (auto& v : out) v = rng.Gaussian();
    return out;
  }
  std::vector<const NoiseFile*> eligible;
  bool rate_match = false;
  for (const auto& f : *files_) {
    if (f.audio.sample_rate_hz != sample_rate_hz) continue;
    rate_match = true;
    if (f.power > 0.0) eligible.push_back(&f);
  }
  if (!rate_match) {
    Fail(ErrorCode::kRateMismatch,
         "no noise file at " + std::to_string(sample_rate_hz) + " Hz (no resampling)");
  }
  if (eligible.empty()) Fail(ErrorCode::kSilentNoise, "every matching noise file is silent");
  const NoiseFile& f = *eligible[rng.Below(eligible.size())];
  const auto& src = f.audio.samples;
  if (src.size() >= length) {
    const std::size_t offset = rng.Below(src.size() - length + 1);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(offset), length, out.begin());
  } else {
    for (std::size_t i = 0; i < length; ++i) out[i] = src[i % src.size()];
  }
  return out;
}

MixResult MixAtSnr(const AudioBuffer& clean, const NoiseSource& noise, double snr_db,
                   std::uint64_t seed) {
  if (!std::isfinite(snr_db)) Fail(ErrorCode::kInvalidArgument, "SNR must be finite");
  ValidateAudio(clean);
  const double p_clean = MeasurePower(clean);
  if (!(p_clean > 0.0)) Fail(ErrorCode::kSilentSignal, "clean signal has zero power");

  Rng rng(seed);
  std::vector<double> segment = noise.Segment(clean.samples.size(), clean.sample_rate_hz, rng);
  const double p_noise = MeasurePower(segment);
  if (!(p_noise > 0.0)) Fail(ErrorCode::kSilentNoise, "noise segment has zero power");

  MixResult result;
  result.alpha = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  for (auto& v : segment) v *= result.alpha;
  result.achieved_snr_db = 10.0 * std::log10(p_clean / MeasurePower(segment));

  result.audio.sample_rate_hz = clean.sample_rate_hz;
  result.audio.samples.resize(clean.samples.size());
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < segment.size(); ++i) {
    const double mixed = clean.samples[i] + segment[i];
    if (mixed > 1.0 || mixed < -1.0) ++clipped;
    result.audio.samples[i] = std::clamp(mixed, -1.0, 1.0);
  }
  result.clip_fraction = static_cast<double>(clipped) / static_cast<double>(segment.size());
  return result;
}

MixResult MixAtSnr(const AudioBuffer& clean, const NoiseSpec& spec) {
  return MixAtSnr(clean, NoiseSource::FromSpec(spec), spec.snr_db, spec.seed);
}

std::uint64_t FileSeed(std::uint64_t seed, std::string_view name) {
  return SplitMix64(seed ^ SplitMix64(Fnv1a64(name)));
}

std::size_t PerturbReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(files.begin(), files.end(), [](const auto& f) { return !f.ok; }));
}

std::string PerturbReport::ToJson() const {
  nlohmann::ordered_json doc;
  doc["snr_db"] = snr_db;
  doc["seed"] = seed;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    nlohmann::ordered_json item;
    item["name"] = f.name;
    if (f.ok) {
      item["achieved_snr_db"] = f.achieved_snr_db;
      item["clip_fraction"] = f.clip_fraction;
    } else {
      item["error"] = f.error;
    }
    list.push_back(std::move(item));
  }
  doc["files"] = std::move(list);
  doc["failures"] = failures();
  return doc.dump(2);
}

PerturbReport PerturbCorpus(const fs::path& in_dir, const fs::path& out_dir,
                            const NoiseSource& noise, double snr_db, std::uint64_t seed,
                            const PerturbOptions& options) {
  std::vector<std::string> names = ListWavFiles(in_dir);
  // An output tree nested in the input (e.g. earlier ladder levels) is not input.
  std::error_code rel_ec;
  const fs::path nested =
      fs::weakly_canonical(out_dir, rel_ec).lexically_relative(fs::weakly_canonical(in_dir, rel_ec));
  if (!rel_ec && !nested.empty() && *nested.begin() != "..") {
    if (nested.generic_string() == ".") {
      Fail(ErrorCode::kInvalidArgument, "output directory must differ from the input directory");
    }
    const std::string prefix = nested.generic_string() + "/";
    std::erase_if(names, [&](const std::string& n) { return n.rfind(prefix, 0) == 0; });
  }
  if (names.empty()) Fail(ErrorCode::kEmptyCorpus, "no .wav files under " + in_dir.string());
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  PerturbReport report;
  report.snr_db = snr_db;
  report.seed = seed;
  report.files.resize(names.size());
  std::vector<std::optional<Error>> failures(names.size());

  ParallelFor(names.size(), options.threads, [&](std::size_t i) {
    PerturbFileResult& r = report.files[i];
    r.name = names[i];
    try {
      const AudioBuffer clean = ReadWav(in_dir / names[i]);
      const MixResult mixed = MixAtSnr(clean, noise, snr_db, FileSeed(seed, names[i]));
      const fs::path target = out_dir / names[i];
      std::error_code dir_ec;
      fs::create_directories(target.parent_path(), dir_ec);
      WriteWavFloat32(target, mixed.audio);
      r.ok = true;
      r.achieved_snr_db = mixed.achieved_snr_db;
      r.clip_fraction = mixed.clip_fraction;
    } catch (const Error& e) {
      r.ok = false;
      r.error = e.what();
      failures[i] = e;
    }
  });

  if (options.strict) {
    for (const auto& f : failures) {
      if (f) throw *f;
    }
  }
  return report;
}

PerturbReport PerturbCorpus(const fs::path& in_dir, const fs::path& out_dir,
                            const NoiseSpec& spec, const PerturbOptions& options) {
  return PerturbCorpus(in_dir, out_dir, NoiseSource::FromSpec(spec), spec.snr_db, spec.seed,
                       options);
}

}  // namespace distmetric
