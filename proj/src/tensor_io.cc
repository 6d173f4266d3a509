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

#include "tensor_io.h"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_set>

#include "error.h"
#include "json.hpp"

namespace distmetric {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read and written as host-order little-endian");

namespace {

constexpr std::uint8_t kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreambleSize = 10;  // magic + version + header length
constexpr std::size_t kAlignment = 64;

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) Fail(ErrorCode::kIo, "read failure on " + path.string());
  return bytes;
}

void WriteFileBytes(const std::filesystem::path& path, const void* data,
                    std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.close();
  if (!out) Fail(ErrorCode::kIo, "write failure on " + path.string());
}

// Minimal parser for the Python dict literal in an NPY header, e.g.
// {'descr': '<f8', 'fortran_order': False, 'shape': (3, 4), }
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  struct Header {
    std::string descr;
    bool fortran_order = false;
    std::vector<std::size_t> shape;
  };

  Header Parse() {
    Header h;
    bool have_descr = false, have_order = false, have_shape = false;
    Expect('{');
    while (true) {
      SkipSpace();
      if (Peek() == '}') {
        ++pos_;
        break;
      }
      const std::string key = ParseString();
      Expect(':');
      SkipSpace();
      if (key == "descr") {
        h.descr = ParseString();
        have_descr = true;
      } else if (key == "fortran_order") {
        h.fortran_order = ParseBool();
        have_order = true;
      } else if (key == "shape") {
        h.shape = ParseShape();
        have_shape = true;
      } else {
        Fail(ErrorCode::kFormat, "unexpected NPY header key '" + key + "'");
      }
      SkipSpace();
      if (Peek() == ',') {
        ++pos_;
        continue;
      }
      Expect('}');
      break;
    }
    SkipSpace();
    if (pos_ != text_.size()) Fail(ErrorCode::kFormat, "trailing NPY header bytes");
    if (!have_descr || !have_order || !have_shape) {
      Fail(ErrorCode::kFormat, "NPY header missing descr, fortran_order or shape");
    }
    return h;
  }

 private:
  char Peek() const {
    if (pos_ >= text_.size()) Fail(ErrorCode::kFormat, "truncated NPY header");
    return text_[pos_];
  }
  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  void Expect(char c) {
    SkipSpace();
    if (Peek() != c) {
      Fail(ErrorCode::kFormat, std::string("NPY header: expected '") + c + "'");
    }
    ++pos_;
  }
  std::string ParseString() {
    SkipSpace();
    const char quote = Peek();
    if (quote != '\'' && quote != '"') {
      Fail(ErrorCode::kFormat, "NPY header: expected string");
    }
    ++pos_;
    const std::size_t end = text_.find(quote, pos_);
    if (end == std::string_view::npos) {
      Fail(ErrorCode::kFormat, "NPY header: unterminated string");
    }
    std::string s(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return s;
  }
  bool ParseBool() {
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    Fail(ErrorCode::kFormat, "NPY header: expected True or False");
  }
  std::vector<std::size_t> ParseShape() {
    Expect('(');
    std::vector<std::size_t> dims;
    while (true) {
      SkipSpace();
      if (Peek() == ')') {
        ++pos_;
        break;
      }
      if (!std::isdigit(static_cast<unsigned char>(Peek()))) {
        Fail(ErrorCode::kFormat, "NPY header: bad shape entry");
      }
      std::size_t v = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        const std::size_t digit = static_cast<std::size_t>(text_[pos_] - '0');
        if (v > (SIZE_MAX - digit) / 10) {
          Fail(ErrorCode::kFormat, "NPY header: shape overflow");
        }
        v = v * 10 + digit;
        ++pos_;
      }
      dims.push_back(v);
      SkipSpace();
      if (Peek() == ',') {
        ++pos_;
        continue;
      }
      Expect(')');
      break;
    }
    return dims;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void ValidateFinite(const RowMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        Fail(ErrorCode::kData, "non-finite value at row " + std::to_string(i) +
                                   ", column " + std::to_string(j));
      }
    }
  }
}

}  // namespace

EmbeddingSet::EmbeddingSet(RowMatrix data, Manifest manifest)
    : data_(std::move(data)), manifest_(std::move(manifest)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    Fail(ErrorCode::kConsistency, "embedding set needs at least one row and column");
  }
  if (manifest_.size() != rows()) {
    Fail(ErrorCode::kConsistency,
         "matrix has " + std::to_string(rows()) + " rows but manifest has " +
             std::to_string(manifest_.size()) + " entries");
  }
  ValidateFinite(data_);
  std::unordered_set<std::string> seen;
  for (const auto& e : manifest_) {
    if (e.utt_id.empty() || e.speaker_id.empty()) {
      Fail(ErrorCode::kConsistency, "manifest entries need nonempty utt_id and speaker_id");
    }
    if (e.duration_s && !(std::isfinite(*e.duration_s) && *e.duration_s >= 0.0)) {
      Fail(ErrorCode::kConsistency, "duration_s of '" + e.utt_id + "' must be >= 0");
    }
    if (!seen.insert(e.utt_id).second) {
      Fail(ErrorCode::kConsistency, "duplicate utt_id '" + e.utt_id + "'");
    }
  }
}

EmbeddingSet EmbeddingSet::Subset(std::span<const std::size_t> indices) const {
  RowMatrix sub(static_cast<Eigen::Index>(indices.size()), data_.cols());
  Manifest entries;
  entries.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= rows()) Fail(ErrorCode::kInvalidArgument, "subset index out of range");
    sub.row(static_cast<Eigen::Index>(k)) = data_.row(static_cast<Eigen::Index>(i));
    entries.push_back(manifest_[i]);
  }
  return EmbeddingSet(std::move(sub), std::move(entries));
}

std::size_t EmbeddingSet::CountSpeakers() const {
  std::set<std::string_view> speakers;
  for (const auto& e : manifest_) speakers.insert(e.speaker_id);
  return speakers.size();
}

bool EmbeddingSet::operator==(const EmbeddingSet& other) const {
  if (data_.rows() != other.data_.rows() || data_.cols() != other.data_.cols()) {
    return false;
  }
  return std::memcmp(data_.data(), other.data_.data(),
                     sizeof(double) * static_cast<std::size_t>(data_.size())) == 0 &&
         manifest_ == other.manifest_;
}

NpyArray ParseNpy(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPreambleSize ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    Fail(ErrorCode::kFormat, "missing NPY magic");
  }
  if (bytes[6] != 1 || bytes[7] != 0) {
    Fail(ErrorCode::kFormat, "unsupported NPY version " + std::to_string(bytes[6]) +
                                 "." + std::to_string(bytes[7]));
  }
  const std::size_t header_len =
      static_cast<std::size_t>(bytes[8]) | (static_cast<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < kPreambleSize + header_len) {
    Fail(ErrorCode::kFormat, "truncated NPY header");
  }
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()) + kPreambleSize,
                              header_len);
  const auto header = HeaderParser(text).Parse();

  NpyArray out;
  std::size_t elem_size = 0;
  if (header.descr == "<f4") {
    out.precision = Precision::kFloat32;
    elem_size = 4;
  } else if (header.descr == "<f8") {
    out.precision = Precision::kFloat64;
    elem_size = 8;
  } else {
    Fail(ErrorCode::kFormat, "unsupported dtype '" + header.descr + "'");
  }
  if (header.fortran_order) Fail(ErrorCode::kFormat, "fortran_order arrays are not supported");
  if (header.shape.size() != 2) Fail(ErrorCode::kFormat, "expected a 2-D array");
  out.rows = header.shape[0];
  out.cols = header.shape[1];
  if (out.cols != 0 && out.rows > SIZE_MAX / out.cols / elem_size) {
    Fail(ErrorCode::kFormat, "declared shape overflows");
  }
  const std::size_t count = out.rows * out.cols;
  const std::size_t payload = bytes.size() - kPreambleSize - header_len;
  if (payload != count * elem_size) {
    Fail(ErrorCode::kFormat, "header declares " + std::to_string(count) +
                                 " values but payload holds " +
                                 std::to_string(payload) + " bytes");
  }
  const std::uint8_t* src = bytes.data() + kPreambleSize + header_len;
  out.values.resize(static_cast<Eigen::Index>(out.rows), static_cast<Eigen::Index>(out.cols));
  double* dst = out.values.data();
  if (elem_size == 8) {
    std::memcpy(dst, src, count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, src + 4 * i, 4);
      dst[i] = static_cast<double>(f);
    }
  }
  return out;
}

NpyArray ReadNpy(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return ParseNpy(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<std::uint8_t> SerializeNpy(const RowMatrix& values, Precision precision) {
  std::ostringstream dict;
  dict << "{'descr': '" << (precision == Precision::kFloat32 ? "<f4" : "<f8")
       << "', 'fortran_order': False, 'shape': (" << values.rows() << ", "
       << values.cols() << "), }";
  std::string header = dict.str();
  // Pad with spaces so the payload starts on a 64-byte boundary; the header
  // is terminated by a newline.
  const std::size_t unpadded = kPreambleSize + header.size() + 1;
  header.append((kAlignment - unpadded % kAlignment) % kAlignment, ' ');
  header.push_back('\n');
  if (header.size() > 0xffff) Fail(ErrorCode::kFormat, "NPY header too long");

  const std::size_t count = static_cast<std::size_t>(values.size());
  const std::size_t elem_size = precision == Precision::kFloat32 ? 4 : 8;
  std::vector<std::uint8_t> bytes(kPreambleSize + header.size() + count * elem_size);
  std::memcpy(bytes.data(), kMagic, sizeof(kMagic));
  bytes[6] = 1;
  bytes[7] = 0;
  bytes[8] = static_cast<std::uint8_t>(header.size() & 0xff);
  bytes[9] = static_cast<std::uint8_t>(header.size() >> 8);
  std::memcpy(bytes.data() + kPreambleSize, header.data(), header.size());
  std::uint8_t* dst = bytes.data() + kPreambleSize + header.size();
  if (elem_size == 8) {
    std::memcpy(dst, values.data(), count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const float f = static_cast<float>(values.data()[i]);
      std::memcpy(dst + 4 * i, &f, 4);
    }
  }
  return bytes;
}

void WriteNpy(const std::filesystem::path& path, const RowMatrix& values,
              Precision precision) {
  const auto bytes = SerializeNpy(values, precision);
  WriteFileBytes(path, bytes.data(), bytes.size());
}

Manifest ParseManifest(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    Fail(ErrorCode::kFormat, "manifest must be an object with an 'entries' array");
  }
  Manifest manifest;
  for (const auto& item : doc["entries"]) {
    if (!item.is_object() || !item.contains("utt_id") || !item["utt_id"].is_string() ||
        !item.contains("speaker_id") || !item["speaker_id"].is_string()) {
      Fail(ErrorCode::kFormat, "manifest entry needs string utt_id and speaker_id");
    }
    ManifestEntry e;
    e.utt_id = item["utt_id"].get<std::string>();
    e.speaker_id = item["speaker_id"].get<std::string>();
    if (item.contains("duration_s") && !item["duration_s"].is_null()) {
      if (!item["duration_s"].is_number()) {
        Fail(ErrorCode::kFormat, "duration_s must be a number");
      }
      e.duration_s = item["duration_s"].get<double>();
    }
    manifest.push_back(std::move(e));
  }
  return manifest;
}

Manifest ReadManifest(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  return ParseManifest(std::string(bytes.begin(), bytes.end()));
}

std::string SerializeManifest(const Manifest& manifest) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& e : manifest) {
    nlohmann::ordered_json item;
    item["utt_id"] = e.utt_id;
    item["speaker_id"] = e.speaker_id;
    if (e.duration_s) item["duration_s"] = *e.duration_s;
    entries.push_back(std::move(item));
  }
  nlohmann::ordered_json doc;
  doc["entries"] = std::move(entries);
  return doc.dump(1) + "\n";
}

void WriteManifest(const std::filesystem::path& path, const Manifest& manifest) {
  const std::string text = SerializeManifest(manifest);
  WriteFileBytes(path, text.data(), text.size());
}

EmbeddingSet ReadEmbeddingSet(const std::filesystem::path& matrix_path,
                              const std::filesystem::path& manifest_path) {
  NpyArray array = ReadNpy(matrix_path);
  Manifest manifest = ReadManifest(manifest_path);
  return EmbeddingSet(std::move(array.values), std::move(manifest));
}

void WriteEmbeddingSet(const EmbeddingSet& set, const std::filesystem::path& matrix_path,
                       const std::filesystem::path& manifest_path, Precision precision) {
  WriteNpy(matrix_path, set.data(), precision);
  WriteManifest(manifest_path, set.manifest());
}

}  // namespace distmetric
