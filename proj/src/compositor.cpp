// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "apiprompt/attribution.hpp"
#include "apiprompt/error.hpp"

namespace apiprompt {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double lanczos(double x) {
  if (x <= -kLanczosLobes || x >= kLanczosLobes) return 0.0;
  return sinc(x) * sinc(x / kLanczosLobes);
}

struct Contributors {
  std::size_t first = 0;
  std::vector<double> weights;
};

// Per output sample: first contributing input index and normalized weights.
std::vector<Contributors> lanczos_contributors(std::size_t in_size, std::size_t out_size) {
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  const double filterscale = std::max(scale, 1.0);
  const double support = kLanczosLobes * filterscale;
  std::vector<Contributors> table(out_size);
  for (std::size_t o = 0; o < out_size; ++o) {
    const double center = (static_cast<double>(o) + 0.5) * scale;
    const auto lo = static_cast<long long>(std::max(0.0, std::floor(center - support + 0.5)));
    const auto hi = std::min(static_cast<long long>(std::floor(center + support + 0.5)),
                             static_cast<long long>(in_size));
    Contributors& c = table[o];
    c.first = static_cast<std::size_t>(lo);
    double total = 0.0;
    for (long long i = lo; i < hi; ++i) {
      const double w = lanczos((static_cast<double>(i) - center + 0.5) / filterscale);
      c.weights.push_back(w);
      total += w;
    }
    if (total != 0.0) {
      for (auto& w : c.weights) w /= total;
    }
  }
  return table;
}

}  // namespace

OverlayMode parse_overlay_mode(const std::string& text) {
  if (text == "black") return OverlayMode::kBlack;
  if (text == "gray" || text == "grey") return OverlayMode::kGray;
  throw Error("unknown overlay mode '" + text + "' (expected black|gray)");
}

std::string to_string(OverlayMode mode) { return mode == OverlayMode::kBlack ? "black" : "gray"; }

PatchGrid smooth3(const PatchGrid& grid) {
  const auto n = static_cast<long long>(grid.side());
  auto clamp = [n](long long v) { return static_cast<std::size_t>(std::clamp(v, 0LL, n - 1)); };
  std::vector<double> out(grid.size());
  for (long long r = 0; r < n; ++r) {
    for (long long c = 0; c < n; ++c) {
      double sum = 0.0;
      for (long long dr = -1; dr <= 1; ++dr) {
        for (long long dc = -1; dc <= 1; ++dc) sum += grid(clamp(r + dr), clamp(c + dc));
      }
      out[static_cast<std::size_t>(r * n + c)] = sum / 9.0;
    }
  }
  return PatchGrid(grid.side(), std::move(out));
}

std::vector<double> resample_lanczos(std::span<const double> values, std::size_t in_h, std::size_t in_w,
                                     std::size_t out_h, std::size_t out_w) {
  if (in_h == 0 || in_w == 0 || out_h == 0 || out_w == 0) {
    throw Error("resample_lanczos: dimensions must be positive");
  }
  if (values.size() != in_h * in_w) throw Error("resample_lanczos: value count does not match dimensions");

  const auto horiz = lanczos_contributors(in_w, out_w);
  std::vector<double> tmp(in_h * out_w);
  for (std::size_t r = 0; r < in_h; ++r) {
    for (std::size_t c = 0; c < out_w; ++c) {
      const Contributors& k = horiz[c];
      double acc = 0.0;
      for (std::size_t i = 0; i < k.weights.size(); ++i) acc += k.weights[i] * values[r * in_w + k.first + i];
      tmp[r * out_w + c] = acc;
    }
  }

  const auto vert = lanczos_contributors(in_h, out_h);
  std::vector<double> out(out_h * out_w);
  for (std::size_t r = 0; r < out_h; ++r) {
    const Contributors& k = vert[r];
    for (std::size_t c = 0; c < out_w; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k.weights.size(); ++i) acc += k.weights[i] * tmp[(k.first + i) * out_w + c];
      out[r * out_w + c] = acc;
    }
  }
  return out;
}

Heatmap resize_lanczos(const PatchGrid& grid, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw Error("resize_lanczos: target dimensions must be positive");
  auto out = resample_lanczos(grid.values(), grid.side(), grid.side(), height, width);
  for (auto& v : out) v = std::clamp(v, 0.0, 1.0);
  return Heatmap(height, width, std::move(out));
}

Heatmap min_cutoff(const Heatmap& heatmap, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error("min_cutoff: theta must lie in [0,1]");
  std::vector<double> out(heatmap.values().begin(), heatmap.values().end());
  for (auto& v : out) v = std::max(v, theta);
  return Heatmap(heatmap.height(), heatmap.width(), std::move(out));
}

Heatmap mask_to_heatmap(const BinaryMask& mask) {
  std::vector<double> out(mask.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask.bits()[i] ? 1.0 : 0.0;
  return Heatmap(mask.height(), mask.width(), std::move(out));
}

RgbImage overlay(const RgbImage& image, const Heatmap& heatmap, OverlayMode mode) {
  if (image.height() != heatmap.height() || image.width() != heatmap.width()) {
    throw Error("overlay: heatmap " + std::to_string(heatmap.height()) + "x" + std::to_string(heatmap.width()) +
                " does not match image " + std::to_string(image.height()) + "x" + std::to_string(image.width()));
  }
  const double base = mode == OverlayMode::kBlack ? 0.0 : static_cast<double>(kGrayLevel);
  RgbImage out(image.height(), image.width());
  for (std::size_t r = 0; r < image.height(); ++r) {
    for (std::size_t c = 0; c < image.width(); ++c) {
      const double h = heatmap(r, c);
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double v = static_cast<double>(image.sample(r, c, ch)) * h + base * (1.0 - h);
        out.set_sample(r, c, ch, static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)));
      }
    }
  }
  return out;
}

Heatmap attention_heatmap(const PatchGrid& grid, std::size_t height, std::size_t width, bool renormalize) {
  PatchGrid smoothed = smooth3(grid);
  if (renormalize) smoothed = normalize_map(smoothed);
  return resize_lanczos(smoothed, height, width);
}

RgbImage compose(const RgbImage& image, const PatchGrid& grid, const ComposeOptions& options) {
  Heatmap h = attention_heatmap(grid, image.height(), image.width(), options.renormalize);
  return overlay(image, min_cutoff(h, options.cutoff), options.mode);
}

RgbImage compose_mask(const RgbImage& image, const BinaryMask& mask, const ComposeOptions& options) {
  return overlay(image, min_cutoff(mask_to_heatmap(mask), options.cutoff), options.mode);
}

}  // namespace apiprompt
