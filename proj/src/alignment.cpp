// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/alignment.hpp"

#include <algorithm>
#include <cmath>

#include "apiprompt/error.hpp"

namespace apiprompt {

using nlohmann::json;

BinaryMask binarize_mean(const Heatmap& heatmap) {
  const auto values = heatmap.values();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  // The rounded mean of a constant can sit one ulp above the constant.
  if (*lo == *hi) return BinaryMask(heatmap.height(), heatmap.width(), true);
  long double sum = 0.0L;
  for (double v : values) sum += v;
  const auto mean = static_cast<double>(sum / static_cast<long double>(values.size()));
  std::vector<std::uint8_t> bits(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) bits[i] = values[i] >= mean ? 1 : 0;
  return BinaryMask(heatmap.height(), heatmap.width(), std::move(bits));
}

AlignmentScore align_masks(const BinaryMask& pred, const BinaryMask& gt, const Heatmap& heatmap) {
  if (pred.height() != gt.height() || pred.width() != gt.width() || heatmap.height() != gt.height() ||
      heatmap.width() != gt.width()) {
    throw Error("align: heatmap " + std::to_string(heatmap.height()) + "x" + std::to_string(heatmap.width()) +
                " and mask " + std::to_string(gt.height()) + "x" + std::to_string(gt.width()) +
                " dimensions differ");
  }
  std::size_t inter = 0, uni = 0, npred = 0, ngt = 0;
  double sq = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool p = pred.bits()[i] != 0;
    const bool g = gt.bits()[i] != 0;
    inter += p && g;
    uni += p || g;
    npred += p;
    ngt += g;
    const double diff = heatmap.values()[i] - (g ? 1.0 : 0.0);
    sq += diff * diff;
  }
  AlignmentScore s;
  s.mse = 100.0 * sq / static_cast<double>(gt.size());
  if (ngt == 0) return s;
  auto pct = [](std::size_t num, std::size_t den) { return 100.0 * static_cast<double>(num) / static_cast<double>(den); };
  s.precision = npred ? pct(inter, npred) : 0.0;
  s.recall = pct(inter, ngt);
  s.iou = pct(inter, uni);
  return s;
}

AlignmentScore align(const Heatmap& heatmap, const BinaryMask& gt) {
  if (heatmap.height() != gt.height() || heatmap.width() != gt.width()) {
    return align_masks(BinaryMask(heatmap.height(), heatmap.width()), gt, heatmap);  // throws
  }
  return align_masks(binarize_mean(heatmap), gt, heatmap);
}

json to_json(const AlignmentRecord& r) {
  // Four decimals keep records stable against last-ulp libm differences.
  auto round4 = [](double x) { return std::round(x * 1e4) / 1e4; };
  auto v = [&](const std::optional<double>& x) { return x ? json(round4(*x)) : json(nullptr); };
  return {{"image_id", r.image_id},          {"label", r.label},         {"h_vlm", r.h_vlm},
          {"precision", v(r.score.precision)}, {"recall", v(r.score.recall)}, {"iou", v(r.score.iou)},
          {"mse", round4(r.score.mse)}};
}

AlignmentRecord alignment_from_json(const json& j) {
  auto opt = [&](const char* key) -> std::optional<double> {
    const json& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  };
  try {
    AlignmentRecord r;
    r.image_id = j.at("image_id").get<std::int64_t>();
    r.label = j.at("label").get<std::string>();
    r.h_vlm = j.at("h_vlm").get<std::string>();
    r.score.precision = opt("precision");
    r.score.recall = opt("recall");
    r.score.iou = opt("iou");
    r.score.mse = j.at("mse").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed alignment record: ") + e.what());
  }
}

}  // namespace apiprompt
