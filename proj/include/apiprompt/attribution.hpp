// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Attribution maps over image patches, computed from tensors exported by a
// heatmap VLM.
//
// CLIP: the image-text similarity is decomposed per image token. For every
// late MSA layer the exporter provides the additive contribution of each
// token to the cls output (already projected into the joint space), and the
// final-layer projected token representations. From those:
//
//   cls(t)  = sum over layers of cos(contribution[layer][t], text)
//   comp(t) = 1 - cos(final_token[t], text)
//   map     = cls + comp - cls * comp          (probabilistic OR, [0,1] inputs)
//
// LLaVA: the mean over output tokens and heads of the attention weights from
// each generated token to each image token.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "apiprompt/containers.hpp"
#include "apiprompt/tensor_exchange.hpp"

namespace apiprompt {

inline constexpr const char* kClipContributions = "clip.contributions";
inline constexpr const char* kClipFinalTokens = "clip.final_tokens";
inline constexpr const char* kClipTextEmbedding = "clip.text_embedding";
inline constexpr const char* kLlavaAttention = "llava.attention";
inline constexpr const char* kAttributionMap = "attribution.map";

inline constexpr int kDefaultClipLayer = 22;
inline constexpr int kDefaultLlavaLayer = 20;

/// Tensors from a CLIP heatmap model. Token indices refer to image tokens
/// only (the exporter drops the cls token), row-major over the patch grid.
struct ClipExport {
  std::size_t patch_side = 0;
  std::size_t embed_dim = 0;
  std::vector<int> layers;           // strictly increasing
  std::vector<float> contributions;  // [layers x P^2 x d]
  std::vector<float> final_tokens;   // [P^2 x d]
  std::vector<float> text_embedding; // [d], unit norm

  std::size_t token_count() const { return patch_side * patch_side; }
  /// Throws apiprompt::Error when shapes or invariants do not hold.
  void validate() const;
  static ClipExport from_manifest(const LoadedManifest& manifest);
};

struct LlavaExport {
  std::size_t patch_side = 0;
  std::size_t output_tokens = 0;  // M
  std::size_t heads = 0;          // H
  int layer = kDefaultLlavaLayer;
  std::vector<float> attention;   // [M x H x P^2], nonnegative

  std::size_t token_count() const { return patch_side * patch_side; }
  void validate() const;
  static LlavaExport from_manifest(const LoadedManifest& manifest);
};

/// Where min-max normalization happens relative to the probabilistic OR.
enum class NormalizeMode { kPre, kPost, kBoth };

NormalizeMode parse_normalize_mode(const std::string& text);
std::string to_string(NormalizeMode mode);

/// (v - min) / (max - min); a constant grid maps to all zeros.
PatchGrid normalize_map(const PatchGrid& grid);

/// Raw per-cell sum of cosines. `layer_subset`, when given, restricts the
/// sum to those exported layers (each must be present in the export).
PatchGrid clip_cls_raw(const ClipExport& exp, const std::optional<std::vector<int>>& layer_subset = {});
PatchGrid clip_comp_raw(const ClipExport& exp);

/// Normalized cls and complementary maps.
PatchGrid clip_cls_map(const ClipExport& exp, const std::optional<std::vector<int>>& layer_subset = {});
PatchGrid clip_comp_map(const ClipExport& exp);

/// Probabilistic OR of two [0,1] grids of equal side.
PatchGrid combine_maps(const PatchGrid& cls, const PatchGrid& comp);

/// Full CLIP attribution map with the chosen normalization placement.
PatchGrid clip_map(const ClipExport& exp, NormalizeMode mode = NormalizeMode::kPre,
                   const std::optional<std::vector<int>>& layer_subset = {});

/// Mean attention over output tokens and heads, then normalized.
PatchGrid llava_map(const LlavaExport& exp);

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const float> a, std::span<const float> b);

/// Grid <-> tensor ([P, P]) helpers for the exchange format.
Tensor grid_to_tensor(const PatchGrid& grid, const std::string& name = kAttributionMap);
PatchGrid grid_from_tensor(const Tensor& tensor);

/// Parses "22" or "20,21,22" into layer indices.
std::vector<int> parse_layer_list(const std::string& text);
std::string format_layer_list(const std::vector<int>& layers);

}  // namespace apiprompt
