// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "apiprompt/containers.hpp"

namespace apiprompt {

enum class OverlayMode {
  kBlack,  // attention prompting: unattended regions fade to black
  kGray,   // segmentation prompting: background fades to mid gray
};

inline constexpr std::uint8_t kGrayLevel = 128;
inline constexpr int kLanczosLobes = 3;

OverlayMode parse_overlay_mode(const std::string& text);
std::string to_string(OverlayMode mode);

/// 3x3 uniform mean with clamp-to-edge padding.
PatchGrid smooth3(const PatchGrid& grid);

/// Separable Lanczos-3 resampling of a row-major in_h x in_w array, horizontal
/// pass first. Unclamped.
std::vector<double> resample_lanczos(std::span<const double> values, std::size_t in_h, std::size_t in_w,
                                     std::size_t out_h, std::size_t out_w);

/// Separable Lanczos-3 resampling to height x width; the kernel widens with
/// the scale factor when downsampling. Result clamped to [0, 1].
Heatmap resize_lanczos(const PatchGrid& grid, std::size_t height, std::size_t width);

/// Replaces every value below `theta` with `theta`.
Heatmap min_cutoff(const Heatmap& heatmap, double theta);

Heatmap mask_to_heatmap(const BinaryMask& mask);

/// out = round(pixel * h + base * (1 - h)), base 0 (black) or 128 (gray),
/// rounding half away from zero.
RgbImage overlay(const RgbImage& image, const Heatmap& heatmap, OverlayMode mode);

struct ComposeOptions {
  OverlayMode mode = OverlayMode::kBlack;
  double cutoff = 0.0;
  bool renormalize = false;  // min-max normalize after smoothing, before resize
};

/// smooth3 -> [normalize] -> resize_lanczos. This is the visual attention
/// heatmap at image resolution, before any cutoff.
Heatmap attention_heatmap(const PatchGrid& grid, std::size_t height, std::size_t width,
                          bool renormalize = false);

/// Attention prompting: attention_heatmap -> min_cutoff -> overlay.
RgbImage compose(const RgbImage& image, const PatchGrid& grid, const ComposeOptions& options);

/// Segmentation prompting: mask_to_heatmap -> min_cutoff -> overlay.
RgbImage compose_mask(const RgbImage& image, const BinaryMask& mask, const ComposeOptions& options);

}  // namespace apiprompt
