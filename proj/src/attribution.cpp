// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apiprompt/error.hpp"

namespace apiprompt {

namespace {

std::size_t exact_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (r * r != n) throw Error("token count " + std::to_string(n) + " is not a perfect square");
  return r;
}

std::size_t patch_side_from(const LoadedManifest& manifest, std::size_t token_count) {
  std::size_t side = exact_sqrt(token_count);
  auto it = manifest.manifest.metadata.find("patch_side");
  if (it != manifest.manifest.metadata.end() && std::to_string(side) != it->second) {
    throw Error("metadata patch_side=" + it->second + " disagrees with " + std::to_string(token_count) +
                " image tokens");
  }
  return side;
}

// Unchecked probabilistic OR; used directly when normalizing afterwards.
// Written as hi + lo*(1-hi) so that swapping the arguments, a zero operand
// and a unit operand all give exact results in floating point.
PatchGrid probabilistic_or(const PatchGrid& a, const PatchGrid& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double hi = std::max(a.values()[i], b.values()[i]);
    const double lo = std::min(a.values()[i], b.values()[i]);
    out[i] = hi + lo * (1.0 - hi);
  }
  return PatchGrid(a.side(), std::move(out));
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += double{a[k]} * double{b[k]};
    na += double{a[k]} * double{a[k]};
    nb += double{b[k]} * double{b[k]};
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

void ClipExport::validate() const {
  if (patch_side == 0 || embed_dim == 0) throw Error("clip export: patch_side and embed_dim must be positive");
  if (layers.empty()) throw Error("clip export: no layers");
  for (std::size_t i = 1; i < layers.size(); ++i) {
    if (layers[i] <= layers[i - 1]) throw Error("clip export: layers must be strictly increasing");
  }
  const std::size_t tokens = token_count();
  if (contributions.size() != layers.size() * tokens * embed_dim) {
    throw Error("clip export: " + std::string(kClipContributions) + " does not match " +
                std::to_string(layers.size()) + " x " + std::to_string(tokens) + " x " +
                std::to_string(embed_dim));
  }
  if (final_tokens.size() != tokens * embed_dim) {
    throw Error("clip export: " + std::string(kClipFinalTokens) + " does not match " + std::to_string(tokens) +
                " x " + std::to_string(embed_dim));
  }
  if (text_embedding.size() != embed_dim) {
    throw Error("clip export: " + std::string(kClipTextEmbedding) + " length differs from embed_dim");
  }
  double norm2 = 0.0;
  for (float v : text_embedding) norm2 += double{v} * double{v};
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-5) throw Error("clip export: text embedding is not unit norm");
}

ClipExport ClipExport::from_manifest(const LoadedManifest& manifest) {
  const Tensor& contrib = manifest.get(kClipContributions);
  const Tensor& final_tokens = manifest.get(kClipFinalTokens);
  const Tensor& text = manifest.get(kClipTextEmbedding);
  if (contrib.shape.size() != 3) throw Error(std::string(kClipContributions) + " must be rank 3");
  if (final_tokens.shape.size() != 2) throw Error(std::string(kClipFinalTokens) + " must be rank 2");
  if (text.shape.size() != 1) throw Error(std::string(kClipTextEmbedding) + " must be rank 1");

  ClipExport exp;
  exp.patch_side = patch_side_from(manifest, contrib.shape[1]);
  exp.embed_dim = contrib.shape[2];
  exp.layers = parse_layer_list(manifest.manifest.metadata.at("layer_indices"));
  if (exp.layers.size() != contrib.shape[0]) {
    throw Error("layer_indices lists " + std::to_string(exp.layers.size()) + " layers but " +
                std::string(kClipContributions) + " has " + std::to_string(contrib.shape[0]));
  }
  exp.contributions = contrib.values;
  exp.final_tokens = final_tokens.values;
  exp.text_embedding = text.values;
  exp.validate();
  return exp;
}

void LlavaExport::validate() const {
  if (patch_side == 0) throw Error("llava export: patch_side must be positive");
  if (output_tokens == 0) throw Error("llava export: no output tokens (M = 0)");
  if (heads == 0) throw Error("llava export: no attention heads (H = 0)");
  if (attention.size() != output_tokens * heads * token_count()) {
    throw Error("llava export: " + std::string(kLlavaAttention) + " does not match M x H x P^2");
  }
  for (float v : attention) {
    if (!(v >= 0.0f)) throw Error("llava export: negative attention weight");
  }
}

LlavaExport LlavaExport::from_manifest(const LoadedManifest& manifest) {
  const Tensor& att = manifest.get(kLlavaAttention);
  if (att.shape.size() != 3) throw Error(std::string(kLlavaAttention) + " must be rank 3");
  LlavaExport exp;
  exp.output_tokens = att.shape[0];
  exp.heads = att.shape[1];
  exp.patch_side = patch_side_from(manifest, att.shape[2]);
  auto layers = parse_layer_list(manifest.manifest.metadata.at("layer_indices"));
  if (layers.size() != 1) throw Error("llava export: layer_indices must name exactly one layer");
  exp.layer = layers.front();
  exp.attention = att.values;
  exp.validate();
  return exp;
}

NormalizeMode parse_normalize_mode(const std::string& text) {
  if (text == "pre") return NormalizeMode::kPre;
  if (text == "post") return NormalizeMode::kPost;
  if (text == "both") return NormalizeMode::kBoth;
  throw Error("unknown normalize mode '" + text + "' (expected pre|post|both)");
}

std::string to_string(NormalizeMode mode) {
  switch (mode) {
    case NormalizeMode::kPre: return "pre";
    case NormalizeMode::kPost: return "post";
    case NormalizeMode::kBoth: return "both";
  }
  return "pre";
}

PatchGrid normalize_map(const PatchGrid& grid) {
  const double lo = grid.min();
  const double hi = grid.max();
  if (hi == lo) return PatchGrid::filled(grid.side(), 0.0);
  const double range = hi - lo;
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (grid.values()[i] - lo) / range;
  return PatchGrid(grid.side(), std::move(out));
}

PatchGrid clip_cls_raw(const ClipExport& exp, const std::optional<std::vector<int>>& layer_subset) {
  exp.validate();
  std::vector<std::size_t> selected;
  if (layer_subset) {
    if (layer_subset->empty()) throw Error("clip: empty layer subset");
    for (int layer : *layer_subset) {
      auto it = std::find(exp.layers.begin(), exp.layers.end(), layer);
      if (it == exp.layers.end()) throw Error("clip: layer " + std::to_string(layer) + " not in export");
      selected.push_back(static_cast<std::size_t>(it - exp.layers.begin()));
    }
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  } else {
    for (std::size_t l = 0; l < exp.layers.size(); ++l) selected.push_back(l);
  }

  const std::size_t tokens = exp.token_count();
  const std::size_t d = exp.embed_dim;
  std::span<const float> contributions(exp.contributions);
  std::vector<double> out(tokens, 0.0);
  for (std::size_t t = 0; t < tokens; ++t) {
    for (std::size_t l : selected) {
      out[t] += cosine(contributions.subspan((l * tokens + t) * d, d), exp.text_embedding);
    }
  }
  return PatchGrid(exp.patch_side, std::move(out));
}

PatchGrid clip_comp_raw(const ClipExport& exp) {
  exp.validate();
  const std::size_t tokens = exp.token_count();
  const std::size_t d = exp.embed_dim;
  std::span<const float> final_tokens(exp.final_tokens);
  std::vector<double> out(tokens);
  for (std::size_t t = 0; t < tokens; ++t) {
    out[t] = 1.0 - cosine(final_tokens.subspan(t * d, d), exp.text_embedding);
  }
  return PatchGrid(exp.patch_side, std::move(out));
}

PatchGrid clip_cls_map(const ClipExport& exp, const std::optional<std::vector<int>>& layer_subset) {
  return normalize_map(clip_cls_raw(exp, layer_subset));
}

PatchGrid clip_comp_map(const ClipExport& exp) { return normalize_map(clip_comp_raw(exp)); }

PatchGrid combine_maps(const PatchGrid& cls, const PatchGrid& comp) {
  if (cls.side() != comp.side()) {
    throw Error("combine_maps: side mismatch " + std::to_string(cls.side()) + " vs " +
                std::to_string(comp.side()));
  }
  auto in_range = [](const PatchGrid& g) { return g.min() >= 0.0 && g.max() <= 1.0; };
  if (!in_range(cls) || !in_range(comp)) throw Error("combine_maps: input outside [0,1]");
  return probabilistic_or(cls, comp);
}

PatchGrid clip_map(const ClipExport& exp, NormalizeMode mode, const std::optional<std::vector<int>>& layer_subset) {
  switch (mode) {
    case NormalizeMode::kPre:
      return combine_maps(clip_cls_map(exp, layer_subset), clip_comp_map(exp));
    case NormalizeMode::kPost:
      return normalize_map(probabilistic_or(clip_cls_raw(exp, layer_subset), clip_comp_raw(exp)));
    case NormalizeMode::kBoth:
      return normalize_map(combine_maps(clip_cls_map(exp, layer_subset), clip_comp_map(exp)));
  }
  throw Error("clip_map: invalid normalize mode");
}

PatchGrid llava_map(const LlavaExport& exp) {
  exp.validate();
  const std::size_t tokens = exp.token_count();
  std::vector<double> sum(tokens, 0.0);
  for (std::size_t m = 0; m < exp.output_tokens; ++m) {
    for (std::size_t h = 0; h < exp.heads; ++h) {
      const float* row = exp.attention.data() + (m * exp.heads + h) * tokens;
      for (std::size_t t = 0; t < tokens; ++t) sum[t] += row[t];
    }
  }
  const double denom = static_cast<double>(exp.output_tokens * exp.heads);
  for (auto& v : sum) v /= denom;
  return normalize_map(PatchGrid(exp.patch_side, std::move(sum)));
}

Tensor grid_to_tensor(const PatchGrid& grid, const std::string& name) {
  Tensor t{name, {grid.side(), grid.side()}, {}};
  t.values.reserve(grid.size());
  for (double v : grid.values()) t.values.push_back(static_cast<float>(v));
  return t;
}

PatchGrid grid_from_tensor(const Tensor& tensor) {
  if (tensor.shape.size() != 2 || tensor.shape[0] != tensor.shape[1]) {
    throw Error("tensor '" + tensor.name + "' is not a square [P, P] grid");
  }
  return PatchGrid(tensor.shape[0], std::vector<double>(tensor.values.begin(), tensor.values.end()));
}

std::vector<int> parse_layer_list(const std::string& text) {
  std::vector<int> layers;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error("invalid layer index '" + item + "'");
    layers.push_back(value);
  }
  if (layers.empty()) throw Error("empty layer list '" + text + "'");
  return layers;
}

std::string format_layer_list(const std::vector<int>& layers) {
  std::string out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(layers[i]);
  }
  return out;
}

}  // namespace apiprompt
