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

#ifndef DISTMETRIC_TENSOR_IO_H_
#define DISTMETRIC_TENSOR_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace distmetric {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ManifestEntry {
  std::string utt_id;
  std::string speaker_id;
  std::optional<double> duration_s;

  bool operator==(const ManifestEntry&) const = default;
};

using Manifest = std::vector<ManifestEntry>;

// N x D utterance embeddings with one manifest entry per row. Immutable once
// constructed; the constructor enforces every invariant (N, D >= 1, finite
// values, matching manifest length, unique utt ids, nonempty ids).
class EmbeddingSet {
 public:
  EmbeddingSet(RowMatrix data, Manifest manifest);

  std::size_t rows() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(data_.cols()); }
  const RowMatrix& data() const { return data_; }
  const Manifest& manifest() const { return manifest_; }

  // Rows at `indices`, in the order given. Indices must be valid and distinct.
  EmbeddingSet Subset(std::span<const std::size_t> indices) const;

  std::size_t CountSpeakers() const;

  bool operator==(const EmbeddingSet& other) const;

 private:
  RowMatrix data_;
  Manifest manifest_;
};

enum class Precision { kFloat32, kFloat64 };

// Raw NPY payload of a 2-D float array.
struct NpyArray {
  std::size_t rows = 0;
  std::size_t cols = 0;
  RowMatrix values;
  Precision precision = Precision::kFloat64;
};

NpyArray ReadNpy(const std::filesystem::path& path);
NpyArray ParseNpy(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> SerializeNpy(const RowMatrix& values,
                                       Precision precision);
void WriteNpy(const std::filesystem::path& path, const RowMatrix& values,
              Precision precision);

Manifest ReadManifest(const std::filesystem::path& path);
Manifest ParseManifest(const std::string& json_text);
std::string SerializeManifest(const Manifest& manifest);
void WriteManifest(const std::filesystem::path& path, const Manifest& manifest);

EmbeddingSet ReadEmbeddingSet(const std::filesystem::path& matrix_path,
                              const std::filesystem::path& manifest_path);
void WriteEmbeddingSet(const EmbeddingSet& set,
                       const std::filesystem::path& matrix_path,
                       const std::filesystem::path& manifest_path,
                       Precision precision = Precision::kFloat64);

}  // namespace distmetric

#endif  // DISTMETRIC_TENSOR_IO_H_
