// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/coco.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "apiprompt/error.hpp"
#include "json.hpp"

namespace apiprompt::coco {

using nlohmann::json;

namespace {

constexpr std::array<Category, 80> kVocabulary{{
    {1, "person"},         {2, "bicycle"},       {3, "car"},           {4, "motorcycle"},
    {5, "airplane"},       {6, "bus"},           {7, "train"},         {8, "truck"},
    {9, "boat"},           {10, "traffic light"}, {11, "fire hydrant"}, {13, "stop sign"},
    {14, "parking meter"}, {15, "bench"},        {16, "bird"},         {17, "cat"},
    {18, "dog"},           {19, "horse"},        {20, "sheep"},        {21, "cow"},
    {22, "elephant"},      {23, "bear"},         {24, "zebra"},        {25, "giraffe"},
    {27, "backpack"},      {28, "umbrella"},     {31, "handbag"},      {32, "tie"},
    {33, "suitcase"},      {34, "frisbee"},      {35, "skis"},         {36, "snowboard"},
    {37, "sports ball"},   {38, "kite"},         {39, "baseball bat"}, {40, "baseball glove"},
    {41, "skateboard"},    {42, "surfboard"},    {43, "tennis racket"}, {44, "bottle"},
    {46, "wine glass"},    {47, "cup"},          {48, "fork"},         {49, "knife"},
    {50, "spoon"},         {51, "bowl"},         {52, "banana"},       {53, "apple"},
    {54, "sandwich"},      {55, "orange"},       {56, "broccoli"},     {57, "carrot"},
    {58, "hot dog"},       {59, "pizza"},        {60, "donut"},        {61, "cake"},
    {62, "chair"},         {63, "couch"},        {64, "potted plant"}, {65, "bed"},
    {67, "dining table"},  {70, "toilet"},       {72, "tv"},           {73, "laptop"},
    {74, "mouse"},         {75, "remote"},       {76, "keyboard"},     {77, "cell phone"},
    {78, "microwave"},     {79, "oven"},         {80, "toaster"},      {81, "sink"},
    {82, "refrigerator"},  {84, "book"},         {85, "clock"},        {86, "vase"},
    {87, "scissors"},      {88, "teddy bear"},   {89, "hair drier"},   {90, "toothbrush"},
}};

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw Error(where + ": missing '" + key + "'");
  return j[key];
}

std::int64_t require_int(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer()) throw Error(where + ": '" + key + "' is not an integer");
  return v.get<std::int64_t>();
}

ImageSize parse_size(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw Error(where + ": RLE size must be [height, width]");
  }
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

}  // namespace

std::span<const Category> vocabulary() { return kVocabulary; }

std::optional<std::size_t> label_index(std::string_view name) {
  for (std::size_t i = 0; i < kVocabulary.size(); ++i) {
    if (kVocabulary[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::string_view> label_for_id(int category_id) {
  for (const auto& c : kVocabulary) {
    if (c.id == category_id) return c.name;
  }
  return std::nullopt;
}

Dataset parse_annotations(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("annotations: malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error("annotations: top level is not an object");

  std::map<std::int64_t, std::string> categories;
  if (root.contains("categories")) {
    for (const auto& c : root["categories"]) {
      const std::int64_t id = require_int(c, "id", "category");
      const json& name = require(c, "name", "category " + std::to_string(id));
      if (!name.is_string() || !label_index(name.get<std::string>())) {
        throw Error("category " + std::to_string(id) + " '" + name.dump() + "' is not an MSCOCO label");
      }
      categories[id] = name.get<std::string>();
    }
  } else {
    for (const auto& c : kVocabulary) categories[c.id] = std::string(c.name);
  }

  Dataset ds;
  for (const auto& img : require(root, "images", "annotations")) {
    ImageRecord rec;
    rec.id = require_int(img, "id", "image");
    const std::string where = "image " + std::to_string(rec.id);
    rec.size.height = static_cast<std::size_t>(require_int(img, "height", where));
    rec.size.width = static_cast<std::size_t>(require_int(img, "width", where));
    if (rec.size.height == 0 || rec.size.width == 0) throw Error(where + ": zero dimension");
    if (img.contains("file_name") && img["file_name"].is_string()) rec.file_name = img["file_name"];
    ds.labels[rec.id];
    ds.images[rec.id] = std::move(rec);
  }

  std::map<std::int64_t, std::set<std::size_t>> present;
  for (const auto& ann : require(root, "annotations", "annotations")) {
    CocoObject obj;
    obj.annotation_id = require_int(ann, "id", "annotation");
    const std::string where = "annotation " + std::to_string(obj.annotation_id);
    obj.image_id = require_int(ann, "image_id", where);
    auto img = ds.images.find(obj.image_id);
    if (img == ds.images.end()) throw Error(where + ": missing image record " + std::to_string(obj.image_id));
    obj.image_size = img->second.size;

    const std::int64_t cat = require_int(ann, "category_id", where);
    auto c = categories.find(cat);
    if (c == categories.end()) throw Error(where + ": unknown category id " + std::to_string(cat));
    obj.category = c->second;

    if (ann.contains("area") && ann["area"].is_number()) obj.declared_area = ann["area"].get<double>();
    if (ann.contains("iscrowd") && ann["iscrowd"].is_number_integer()) obj.iscrowd = ann["iscrowd"].get<int>() != 0;

    const json& seg = require(ann, "segmentation", where);
    if (seg.is_array()) {
      Polygons polys;
      for (const auto& p : seg) {
        if (!p.is_array()) throw Error(where + ": polygon is not an array");
        std::vector<double> coords;
        for (const auto& v : p) {
          if (!v.is_number()) throw Error(where + ": polygon coordinate is not a number");
          coords.push_back(v.get<double>());
        }
        polys.push_back(std::move(coords));
      }
      obj.segmentation = std::move(polys);
    } else if (seg.is_object()) {
      const json& counts = require(seg, "counts", where);
      if (counts.is_string()) {
        ds.warnings.push_back(where + ": compressed RLE segmentation is not supported; skipped");
        continue;
      }
      if (!counts.is_array()) throw Error(where + ": RLE counts must be an array");
      Rle rle;
      rle.size = parse_size(require(seg, "size", where), where);
      if (rle.size != obj.image_size) throw Error(where + ": RLE size differs from image size");
      for (const auto& v : counts) {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw Error(where + ": invalid RLE count");
        rle.counts.push_back(v.get<std::uint32_t>());
      }
      obj.segmentation = std::move(rle);
    } else {
      throw Error(where + ": segmentation must be a polygon list or an RLE object");
    }

    present[obj.image_id].insert(*label_index(obj.category));
    ds.objects.push_back(std::move(obj));
  }

  for (const auto& [image_id, indices] : present) {
    auto& out = ds.labels[image_id];
    for (std::size_t i : indices) out.emplace_back(kVocabulary[i].name);
  }
  return ds;
}

BinaryMask decode_rle(std::span<const std::uint32_t> counts, ImageSize size) {
  const std::size_t total = size.height * size.width;
  std::size_t sum = 0;
  for (auto c : counts) sum += c;
  if (sum != total) {
    throw Error("decode_rle: counts sum to " + std::to_string(sum) + " but mask has " + std::to_string(total) +
                " pixels");
  }
  BinaryMask mask(size.height, size.width);
  std::size_t pos = 0;
  bool value = false;
  for (auto c : counts) {
    if (value) {
      for (std::size_t k = pos; k < pos + c; ++k) mask.set(k % size.height, k / size.height, true);
    }
    pos += c;
    value = !value;
  }
  return mask;
}

Rle encode_rle(const BinaryMask& mask) {
  Rle rle;
  rle.size = {mask.height(), mask.width()};
  bool value = false;
  std::uint32_t run = 0;
  for (std::size_t col = 0; col < mask.width(); ++col) {
    for (std::size_t row = 0; row < mask.height(); ++row) {
      if (mask(row, col) != value) {
        rle.counts.push_back(run);
        run = 0;
        value = !value;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rasterize_polygon(const Polygons& polygons, ImageSize size) {
  BinaryMask mask(size.height, size.width);
  std::vector<double> crossings;
  for (const auto& poly : polygons) {
    if (poly.size() % 2 != 0) throw Error("rasterize_polygon: odd number of coordinates");
    if (poly.size() < 6) throw Error("rasterize_polygon: degenerate polygon with fewer than 3 vertices");
    const std::size_t n = poly.size() / 2;
    for (std::size_t row = 0; row < size.height; ++row) {
      const double y = static_cast<double>(row) + 0.5;
      crossings.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const double x0 = poly[2 * i], y0 = poly[2 * i + 1];
        const double x1 = poly[2 * ((i + 1) % n)], y1 = poly[2 * ((i + 1) % n) + 1];
        if ((y0 <= y) != (y1 <= y)) crossings.push_back(x0 + (y - y0) * (x1 - x0) / (y1 - y0));
      }
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        // Pixel col is inside when crossings[k] <= col + 0.5 < crossings[k + 1].
        const double lo = std::ceil(crossings[k] - 0.5);
        const double hi = std::ceil(crossings[k + 1] - 0.5);
        const auto first = static_cast<long long>(std::max(lo, 0.0));
        const auto last = static_cast<long long>(std::min(hi, static_cast<double>(size.width)));
        for (long long col = first; col < last; ++col) mask.set(row, static_cast<std::size_t>(col), true);
      }
    }
  }
  return mask;
}

BinaryMask rasterize(const CocoObject& object) {
  if (const auto* polys = std::get_if<Polygons>(&object.segmentation)) {
    return rasterize_polygon(*polys, object.image_size);
  }
  const Rle& rle = std::get<Rle>(object.segmentation);
  return decode_rle(rle.counts, rle.size);
}

double mask_fraction(const BinaryMask& mask) {
  if (mask.size() == 0) return 0.0;
  return static_cast<double>(mask.popcount()) / static_cast<double>(mask.size());
}

double object_size_fraction(const CocoObject& object) { return mask_fraction(rasterize(object)); }

BinaryMask label_mask(const Dataset& dataset, std::int64_t image_id, std::string_view label,
                      InstancePolicy policy) {
  auto img = dataset.images.find(image_id);
  if (img == dataset.images.end()) throw Error("no image record " + std::to_string(image_id));
  BinaryMask out(img->second.size.height, img->second.size.width);
  std::size_t best = 0;
  for (const auto& obj : dataset.objects) {
    if (obj.image_id != image_id || obj.category != label) continue;
    BinaryMask m = rasterize(obj);
    if (policy == InstancePolicy::kUnion) {
      out |= m;
    } else if (m.popcount() > best) {
      best = m.popcount();
      out = std::move(m);
    }
  }
  return out;
}

}  // namespace apiprompt::coco
