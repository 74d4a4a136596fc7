// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "apiprompt/containers.hpp"

namespace apiprompt::coco {

/// The 80 MSCOCO instance categories in official id order.
struct Category {
  int id;
  std::string_view name;
};
std::span<const Category> vocabulary();
/// Index into vocabulary() for a label name, or nullopt.
std::optional<std::size_t> label_index(std::string_view name);
std::optional<std::string_view> label_for_id(int category_id);

struct ImageSize {
  std::size_t height = 0;
  std::size_t width = 0;
  bool operator==(const ImageSize&) const = default;
};

/// Uncompressed COCO run-length encoding: column-major, first run counts 0s.
struct Rle {
  std::vector<std::uint32_t> counts;
  ImageSize size;
};

/// Polygon list, each polygon flat [x0, y0, x1, y1, ...] in pixel units.
using Polygons = std::vector<std::vector<double>>;
using Segmentation = std::variant<Polygons, Rle>;

struct CocoObject {
  std::int64_t annotation_id = 0;
  std::int64_t image_id = 0;
  std::string category;
  Segmentation segmentation;
  double declared_area = 0.0;
  ImageSize image_size;
  bool iscrowd = false;
};

struct ImageRecord {
  std::int64_t id = 0;
  std::string file_name;
  ImageSize size;
};

struct Dataset {
  std::map<std::int64_t, ImageRecord> images;
  std::vector<CocoObject> objects;
  /// Present labels per image, deduplicated, in vocabulary order. Every
  /// image record gets an entry, possibly empty.
  std::map<std::int64_t, std::vector<std::string>> labels;
  std::vector<std::string> warnings;
};

/// Parses COCO instances JSON. Category names come from the file's
/// "categories" array when present, else from the official id table; every
/// name must belong to the 80-label vocabulary.
Dataset parse_annotations(std::string_view json_text);

BinaryMask decode_rle(std::span<const std::uint32_t> counts, ImageSize size);
Rle encode_rle(const BinaryMask& mask);

/// Even-odd fill of each polygon sampled at pixel centers, unioned.
BinaryMask rasterize_polygon(const Polygons& polygons, ImageSize size);

BinaryMask rasterize(const CocoObject& object);

/// Popcount / (H * W).
double mask_fraction(const BinaryMask& mask);
double object_size_fraction(const CocoObject& object);

enum class InstancePolicy { kUnion, kLargest };

/// Ground-truth mask for a label on one image: union (or largest) over all
/// instances of that category. All-false if the label is absent.
BinaryMask label_mask(const Dataset& dataset, std::int64_t image_id, std::string_view label,
                      InstancePolicy policy = InstancePolicy::kUnion);

}  // namespace apiprompt::coco
