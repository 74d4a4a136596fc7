// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/tensor_exchange.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <set>

#include "apiprompt/error.hpp"
#include "json.hpp"

namespace apiprompt {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kRequiredMetadata[] = {"source_model", "layer_indices"};

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void check_name(const std::string& name) {
  if (name.empty()) throw Error("tensor with empty name");
  if (name.find('/') != std::string::npos || name.find('\\') != std::string::npos || name == "." ||
      name == "..") {
    throw Error("tensor '" + name + "': name must not contain path separators");
  }
}

void check_metadata(const Metadata& metadata) {
  for (const char* key : kRequiredMetadata) {
    if (!metadata.contains(key)) throw Error(std::string("manifest metadata lacks '") + key + "'");
  }
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TensorEntry parse_entry(const json& j) {
  TensorEntry e;
  if (!j.is_object()) throw Error("manifest: tensor entry is not an object");
  if (!j.contains("name") || !j["name"].is_string()) throw Error("manifest: tensor entry without name");
  e.name = j["name"].get<std::string>();
  auto field = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw Error("tensor '" + e.name + "': missing field '" + key + "'");
    return j[key];
  };
  const json& dtype = field("dtype");
  if (!dtype.is_string()) throw Error("tensor '" + e.name + "': dtype must be a string");
  e.dtype = dtype.get<std::string>();
  if (e.dtype != kDtypeF32le) throw Error("tensor '" + e.name + "': unknown dtype '" + e.dtype + "'");
  const json& shape = field("shape");
  if (!shape.is_array() || shape.empty()) {
    throw Error("tensor '" + e.name + "': shape must be a non-empty array");
  }
  for (const auto& d : shape) {
    if (!d.is_number_integer() || d.get<long long>() <= 0) {
      throw Error("tensor '" + e.name + "': shape entries must be positive integers");
    }
    e.shape.push_back(d.get<std::size_t>());
  }
  const json& file = field("file");
  if (!file.is_string()) throw Error("tensor '" + e.name + "': file must be a string");
  e.file = file.get<std::string>();
  fs::path rel(e.file);
  if (e.file.empty() || rel.is_absolute() || rel.has_root_path()) {
    throw Error("tensor '" + e.name + "': file must be a relative path");
  }
  for (const auto& part : rel) {
    if (part == "..") throw Error("tensor '" + e.name + "': file must stay inside the manifest directory");
  }
  return e;
}

}  // namespace

std::size_t Tensor::element_count() const { return product(shape); }

const Tensor* LoadedManifest::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const Tensor& LoadedManifest::get(const std::string& name) const {
  if (const Tensor* t = find(name)) return *t;
  throw Error("manifest has no tensor '" + name + "'");
}

std::vector<unsigned char> encode_f32le(std::span<const float> values) {
  std::vector<unsigned char> out(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) out[i * 4 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return out;
}

std::vector<float> decode_f32le(std::span<const unsigned char> bytes) {
  if (bytes.size() % 4 != 0) throw Error("f32le payload length is not a multiple of 4");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t{bytes[i * 4 + b]} << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

LoadedManifest load_manifest(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) throw Error("missing " + manifest_path.string());

  json root;
  {
    std::ifstream in(manifest_path);
    try {
      root = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(manifest_path.string() + ": malformed JSON: " + e.what());
    }
  }
  if (!root.is_object()) throw Error(manifest_path.string() + ": top level is not an object");

  LoadedManifest loaded;
  TensorManifest& m = loaded.manifest;
  if (!root.contains("version") || !root["version"].is_number_integer()) {
    throw Error(manifest_path.string() + ": missing integer 'version'");
  }
  m.version = root["version"].get<int>();
  if (m.version != kManifestVersion) {
    throw Error(manifest_path.string() + ": unsupported version " + std::to_string(m.version));
  }
  if (!root.contains("tensors") || !root["tensors"].is_array()) {
    throw Error(manifest_path.string() + ": missing 'tensors' array");
  }
  if (root.contains("metadata")) {
    if (!root["metadata"].is_object()) throw Error(manifest_path.string() + ": metadata is not an object");
    for (const auto& [k, v] : root["metadata"].items()) {
      if (!v.is_string()) throw Error("metadata '" + k + "' is not a string");
      m.metadata[k] = v.get<std::string>();
    }
  }
  check_metadata(m.metadata);

  std::set<std::string> seen;
  for (const auto& j : root["tensors"]) {
    TensorEntry e = parse_entry(j);
    if (!seen.insert(e.name).second) throw Error("duplicate tensor name '" + e.name + "'");
    const fs::path file = dir / e.file;
    if (!fs::is_regular_file(file)) throw Error("tensor '" + e.name + "': missing file " + file.string());
    auto bytes = read_bytes(file);
    const std::size_t expected = 4 * product(e.shape);
    if (bytes.size() != expected) {
      throw Error("tensor '" + e.name + "': shape requires " + std::to_string(expected) +
                  " bytes but file has " + std::to_string(bytes.size()));
    }
    Tensor t{e.name, e.shape, decode_f32le(bytes)};
    for (float v : t.values) {
      if (!std::isfinite(v)) throw Error("tensor '" + e.name + "': non-finite value");
    }
    loaded.tensors.push_back(std::move(t));
    m.tensors.push_back(std::move(e));
  }
  return loaded;
}

void save_manifest(std::span<const Tensor> tensors, const Metadata& metadata, const fs::path& dir) {
  check_metadata(metadata);
  std::set<std::string> seen;
  for (const auto& t : tensors) {
    check_name(t.name);
    if (!seen.insert(t.name).second) throw Error("duplicate tensor name '" + t.name + "'");
    if (t.shape.empty()) throw Error("tensor '" + t.name + "': empty shape");
    for (auto d : t.shape) {
      if (d == 0) throw Error("tensor '" + t.name + "': zero-sized dimension");
    }
    if (t.values.size() != t.element_count()) {
      throw Error("tensor '" + t.name + "': value count does not match shape");
    }
    for (float v : t.values) {
      if (!std::isfinite(v)) throw Error("tensor '" + t.name + "': non-finite value");
    }
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

  json root;
  root["version"] = kManifestVersion;
  root["tensors"] = json::array();
  for (const auto& t : tensors) {
    const std::string file = t.name + ".f32";
    auto bytes = encode_f32le(t.values);
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + (dir / file).string());
    root["tensors"].push_back({{"name", t.name}, {"dtype", kDtypeF32le}, {"shape", t.shape}, {"file", file}});
  }
  root["metadata"] = metadata;

  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << root.dump(2) << '\n';
  if (!out) throw Error("failed writing " + (dir / "manifest.json").string());
}

}  // namespace apiprompt
