// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "apiprompt/containers.hpp"
#include "json.hpp"

namespace apiprompt {

/// Percentages in [0, 100]; nullopt when the ground-truth mask is empty.
/// mse is 100 x mean((h - gt)^2) over the continuous heatmap.
struct AlignmentScore {
  std::optional<double> precision, recall, iou;
  double mse = 0.0;
};

/// Foreground where h >= mean(h). A constant heatmap is all foreground.
BinaryMask binarize_mean(const Heatmap& heatmap);

/// Scores `heatmap` against `gt` after mean-threshold binarization.
AlignmentScore align(const Heatmap& heatmap, const BinaryMask& gt);

/// Same scoring with an explicit predicted mask; `heatmap` feeds only mse.
AlignmentScore align_masks(const BinaryMask& pred, const BinaryMask& gt, const Heatmap& heatmap);

/// One JSON-lines alignment record.
struct AlignmentRecord {
  std::int64_t image_id = 0;
  std::string label;
  std::string h_vlm;
  AlignmentScore score;
};

nlohmann::json to_json(const AlignmentRecord& record);
AlignmentRecord alignment_from_json(const nlohmann::json& j);

}  // namespace apiprompt
