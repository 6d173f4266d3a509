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

#include "wav_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "error.h"

namespace distmetric {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint16_t Le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t Le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
void Put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void Put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}
void PutTag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::vector<std::uint8_t> Header(const AudioBuffer& audio, std::uint16_t format,
                                 std::uint16_t bits, std::size_t data_bytes) {
  const std::uint16_t block_align = bits / 8;
  const bool is_float = format == kFormatFloat;
  const std::uint32_t fmt_size = is_float ? 18 : 16;
  const std::uint32_t fact_size = is_float ? 12 : 0;
  std::vector<std::uint8_t> out;
  PutTag(out, "RIFF");
  Put32(out, static_cast<std::uint32_t>(4 + 8 + fmt_size + fact_size + 8 + data_bytes));
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  Put32(out, fmt_size);
  Put16(out, format);
  Put16(out, 1);
  Put32(out, audio.sample_rate_hz);
  Put32(out, audio.sample_rate_hz * block_align);
  Put16(out, block_align);
  Put16(out, bits);
  if (is_float) {
    Put16(out, 0);  // cbSize
    PutTag(out, "fact");
    Put32(out, 4);
    Put32(out, static_cast<std::uint32_t>(audio.samples.size()));
  }
  PutTag(out, "data");
  Put32(out, static_cast<std::uint32_t>(data_bytes));
  return out;
}

}  // namespace

void ValidateAudio(const AudioBuffer& audio) {
  if (audio.sample_rate_hz == 0) Fail(ErrorCode::kData, "sample rate must be positive");
  if (audio.samples.empty()) Fail(ErrorCode::kData, "audio has no samples");
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    const double s = audio.samples[i];
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      Fail(ErrorCode::kData, "sample " + std::to_string(i) + " is outside [-1, 1]");
    }
  }
}

AudioBuffer ParseWav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    Fail(ErrorCode::kFormat, "not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = Le32(chunk + 4);
    const std::size_t body = pos + 8;
    // Some writers leave the data size at 0 or oversize for streamed files.
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) Fail(ErrorCode::kFormat, "fmt chunk too short");
      const std::uint8_t* f = bytes.data() + body;
      format = Le16(f);
      channels = Le16(f + 2);
      rate = Le32(f + 4);
      bits = Le16(f + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) Fail(ErrorCode::kFormat, "extensible fmt chunk too short");
        format = Le16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) Fail(ErrorCode::kFormat, "missing fmt chunk");
  if (data == nullptr) Fail(ErrorCode::kFormat, "missing data chunk");
  if (channels != 1) {
    Fail(ErrorCode::kData, "expected mono audio, got " + std::to_string(channels) + " channels");
  }

  AudioBuffer audio;
  audio.sample_rate_hz = rate;
  if (format == kFormatPcm && bits == 16) {
    const std::size_t count = data_size / 2;
    audio.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = static_cast<std::int16_t>(Le16(data + 2 * i));
      audio.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t count = data_size / 4;
    audio.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, data + 4 * i, 4);
      audio.samples[i] = static_cast<double>(f);
    }
  } else {
    Fail(ErrorCode::kFormat, "unsupported WAV encoding (format " + std::to_string(format) +
                                 ", " + std::to_string(bits) + " bits)");
  }
  ValidateAudio(audio);
  return audio;
}

AudioBuffer ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return ParseWav(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<std::uint8_t> SerializeWavFloat32(const AudioBuffer& audio) {
  const std::size_t data_bytes = 4 * audio.samples.size();
  std::vector<std::uint8_t> out = Header(audio, kFormatFloat, 32, data_bytes);
  const std::size_t offset = out.size();
  out.resize(offset + data_bytes);
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    const float f = static_cast<float>(audio.samples[i]);
    std::memcpy(out.data() + offset + 4 * i, &f, 4);
  }
  return out;
}

std::vector<std::uint8_t> SerializeWavPcm16(const AudioBuffer& audio) {
  const std::size_t data_bytes = 2 * audio.samples.size();
  std::vector<std::uint8_t> out = Header(audio, kFormatPcm, 16, data_bytes);
  for (double s : audio.samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    Put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

void WriteWavFloat32(const std::filesystem::path& path, const AudioBuffer& audio) {
  const auto bytes = SerializeWavFloat32(audio);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) Fail(ErrorCode::kIo, "write failure on " + path.string());
}

}  // namespace distmetric
