// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace apiprompt {

/// Square P x P attribution map over image patches, row-major.
///
/// Cell (row, col) corresponds to image token `row * P + col`, i.e. the
/// 1-based rule t = j + P (i - 1). Values are always finite.
class PatchGrid {
 public:
  PatchGrid(std::size_t side, std::vector<double> values);
  static PatchGrid filled(std::size_t side, double value);

  std::size_t side() const { return side_; }
  std::size_t size() const { return values_.size(); }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * side_ + col]; }
  std::span<const double> values() const { return values_; }

  double min() const;
  double max() const;

  bool operator==(const PatchGrid&) const = default;

 private:
  std::size_t side_;
  std::vector<double> values_;
};

/// H x W continuous mask with every value in [0, 1], row-major.
class Heatmap {
 public:
  Heatmap(std::size_t height, std::size_t width, std::vector<double> values);
  static Heatmap filled(std::size_t height, std::size_t width, double value);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
  std::span<const double> values() const { return values_; }

  bool operator==(const Heatmap&) const = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> values_;
};

/// H x W boolean mask, row-major, one byte per pixel (0 or 1).
class BinaryMask {
 public:
  BinaryMask(std::size_t height, std::size_t width, bool fill = false);
  BinaryMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> bits);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return bits_.size(); }
  bool operator()(std::size_t row, std::size_t col) const { return bits_[row * width_ + col] != 0; }
  void set(std::size_t row, std::size_t col, bool on) { bits_[row * width_ + col] = on ? 1 : 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  std::size_t popcount() const;
  /// In-place union; dimensions must match.
  BinaryMask& operator|=(const BinaryMask& other);

  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<std::uint8_t> bits_;
};

/// Interleaved 8-bit RGB image, row-major.
class RgbImage {
 public:
  RgbImage(std::size_t height, std::size_t width, std::uint8_t fill = 0);
  RgbImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> samples);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::uint8_t sample(std::size_t row, std::size_t col, std::size_t channel) const {
    return samples_[(row * width_ + col) * 3 + channel];
  }
  void set_sample(std::size_t row, std::size_t col, std::size_t channel, std::uint8_t v) {
    samples_[(row * width_ + col) * 3 + channel] = v;
  }
  std::span<const std::uint8_t> samples() const { return samples_; }

  bool operator==(const RgbImage&) const = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<std::uint8_t> samples_;
};

}  // namespace apiprompt
