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

#ifndef DISTMETRIC_WAV_IO_H_
#define DISTMETRIC_WAV_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace distmetric {

// Mono audio with samples in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate_hz = 0;
};

// Checks the AudioBuffer invariants (>= 1 sample, finite, within [-1, 1],
// positive rate); raises DataError otherwise.
void ValidateAudio(const AudioBuffer& audio);

// RIFF/WAVE, mono, PCM 16-bit or IEEE float 32-bit.
AudioBuffer ReadWav(const std::filesystem::path& path);
AudioBuffer ParseWav(std::span<const std::uint8_t> bytes);

// Writes IEEE float 32-bit mono.
void WriteWavFloat32(const std::filesystem::path& path, const AudioBuffer& audio);
std::vector<std::uint8_t> SerializeWavFloat32(const AudioBuffer& audio);
// PCM 16-bit, used for fixtures and tests.
std::vector<std::uint8_t> SerializeWavPcm16(const AudioBuffer& audio);

}  // namespace distmetric

#endif  // DISTMETRIC_WAV_IO_H_
