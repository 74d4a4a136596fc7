// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/containers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apiprompt/error.hpp"

namespace apiprompt {

PatchGrid::PatchGrid(std::size_t side, std::vector<double> values)
    : side_(side), values_(std::move(values)) {
  if (side_ == 0) throw Error("PatchGrid: side must be positive");
  if (values_.size() != side_ * side_) {
    throw Error("PatchGrid: expected " + std::to_string(side_ * side_) + " values, got " +
                std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error("PatchGrid: non-finite value");
  }
}

PatchGrid PatchGrid::filled(std::size_t side, double value) {
  return PatchGrid(side, std::vector<double>(side * side, value));
}

double PatchGrid::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PatchGrid::max() const { return *std::max_element(values_.begin(), values_.end()); }

Heatmap::Heatmap(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height_ == 0 || width_ == 0) throw Error("Heatmap: dimensions must be positive");
  if (values_.size() != height_ * width_) {
    throw Error("Heatmap: expected " + std::to_string(height_ * width_) + " values, got " +
                std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("Heatmap: value outside [0,1]");
  }
}

Heatmap Heatmap::filled(std::size_t height, std::size_t width, double value) {
  return Heatmap(height, width, std::vector<double>(height * width, value));
}

BinaryMask::BinaryMask(std::size_t height, std::size_t width, bool fill)
    : height_(height), width_(width), bits_(height * width, fill ? 1 : 0) {}

BinaryMask::BinaryMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  if (bits_.size() != height_ * width_) throw Error("BinaryMask: bit count does not match dimensions");
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t BinaryMask::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask& BinaryMask::operator|=(const BinaryMask& other) {
  if (other.height_ != height_ || other.width_ != width_) {
    throw Error("BinaryMask: union of masks with different dimensions");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

RgbImage::RgbImage(std::size_t height, std::size_t width, std::uint8_t fill)
    : height_(height), width_(width), samples_(height * width * 3, fill) {
  if (height_ == 0 || width_ == 0) throw Error("RgbImage: dimensions must be positive");
}

RgbImage::RgbImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> samples)
    : height_(height), width_(width), samples_(std::move(samples)) {
  if (height_ == 0 || width_ == 0) throw Error("RgbImage: dimensions must be positive");
  if (samples_.size() != height_ * width_ * 3) {
    throw Error("RgbImage: buffer length does not equal H*W*3");
  }
}

}  // namespace apiprompt
