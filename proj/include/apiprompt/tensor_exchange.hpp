// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Directory-based tensor exchange format used between model exporters and
// the toolkit:
//
//   <dir>/manifest.json   {"version": 1,
//                          "tensors": [{"name", "dtype": "f32le", "shape", "file"}],
//                          "metadata": {"source_model": ..., "layer_indices": ...}}
//   <dir>/<file>          raw little-endian float32, row-major, no header
//
// Byte length of every file must be exactly 4 * product(shape).

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace apiprompt {

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kDtypeF32le = "f32le";

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> values;

  std::size_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

struct TensorEntry {
  std::string name;
  std::string dtype;
  std::vector<std::size_t> shape;
  std::string file;
};

using Metadata = std::map<std::string, std::string>;

struct TensorManifest {
  int version = kManifestVersion;
  std::vector<TensorEntry> tensors;
  Metadata metadata;
};

struct LoadedManifest {
  TensorManifest manifest;
  std::vector<Tensor> tensors;  // same order as manifest.tensors

  const Tensor* find(const std::string& name) const;
  /// Throws apiprompt::Error naming the tensor when absent.
  const Tensor& get(const std::string& name) const;
};

/// Reads `dir/manifest.json` and every tensor file it declares.
LoadedManifest load_manifest(const std::filesystem::path& dir);

/// Writes `tensors` to `dir` (created if needed). Each tensor goes to
/// `<name>.f32`. Rejects non-finite values, duplicate names and metadata
/// lacking "source_model" or "layer_indices".
void save_manifest(std::span<const Tensor> tensors, const Metadata& metadata,
                   const std::filesystem::path& dir);

/// Little-endian float32 codec, independent of host byte order.
std::vector<unsigned char> encode_f32le(std::span<const float> values);
std::vector<float> decode_f32le(std::span<const unsigned char> bytes);

}  // namespace apiprompt
