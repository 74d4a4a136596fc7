// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Aggregations over POPE answers and alignment scores: prompted-vs-baseline
// delta tables, stratification by segmentation-prompting outcome, IoU split,
// cutoff sweep and object-size bins. Every routine is a pure fold over its
// inputs; file handling lives in the CLI.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apiprompt/alignment.hpp"
#include "apiprompt/coco.hpp"
#include "apiprompt/pope.hpp"
#include "json.hpp"

namespace apiprompt::report {

enum class Marker { kNone, kUp, kDown };

/// "▲", "▽" or "".
std::string symbol(Marker marker);

/// Marker for `variant` against `baseline`, comparing values rounded to two
/// decimals. Lower-is-better columns invert the polarity. Both undefined
/// gives kNone; exactly one undefined throws.
Marker compare(const std::optional<double>& variant, const std::optional<double>& baseline,
               bool higher_is_better = true);

struct Column {
  std::string key;    // JSON key, e.g. "accuracy"
  std::string label;  // header, e.g. "Acc."
  bool higher_is_better = true;
};

struct Cell {
  std::optional<double> value;
  Marker marker = Marker::kNone;
};

struct Row {
  std::string name;
  std::vector<Cell> cells;
};

struct DeltaTable {
  std::string title;
  std::vector<Column> columns;
  Row baseline;           // unmarked cells
  std::vector<Row> rows;  // marked against baseline
};

/// Generic delta table. `baseline` and each variant carry one value per column.
DeltaTable delta_table(std::string title, std::vector<Column> columns, const std::string& baseline_name,
                       std::span<const std::optional<double>> baseline,
                       std::span<const std::pair<std::string, std::vector<std::optional<double>>>> variants);

std::vector<Column> pope_columns();
std::vector<std::optional<double>> pope_values(const pope::PopeMetrics& m);

using NamedMetrics = std::pair<std::string, pope::PopeMetrics>;

/// Acc./Prec./Rec./TNR/F1 table of variants against the unprompted baseline.
DeltaTable delta_table(const NamedMetrics& baseline, std::span<const NamedMetrics> variants,
                       std::string title = "POPE results");

std::string render_text(const DeltaTable& table);
nlohmann::json to_json(const DeltaTable& table);

/// Answers carrying their question, joined once by question_id.
struct JoinedAnswer {
  pope::PopeQuestion question;
  pope::Verdict verdict;
};

std::vector<JoinedAnswer> join(std::span<const pope::PopeQuestion> questions,
                               std::span<const pope::PopeAnswer> answers);

std::vector<pope::Judgement> judgements(std::span<const JoinedAnswer> answers);

struct Stratum {
  std::string name;
  std::size_t questions = 0;
  std::optional<double> share;  // percent of all stratified questions
  pope::PopeMetrics metrics;
};

struct SegStratification {
  Stratum correct;
  Stratum incorrect;
};

/// Splits `variant` answers by whether the segmentation-prompted run answered
/// the same question correctly. Throws if a variant question has no
/// segmentation answer, or if the two sets share no question.
SegStratification stratify_by_seg_case(std::span<const JoinedAnswer> seg_answers,
                                       std::span<const JoinedAnswer> variant_answers);

/// Question ids that the segmentation run answered correctly.
std::vector<std::int64_t> seg_correct_ids(std::span<const JoinedAnswer> seg_answers);

struct RecallGroup {
  std::size_t count = 0;
  pope::Counts counts;
  std::optional<double> recall;
};

struct IouSplit {
  double threshold = 10.0;
  RecallGroup at_or_above;
  RecallGroup below;
  std::size_t unmatched = 0;  // present answers without an alignment score
};

inline constexpr double kDefaultIouThreshold = 10.0;

/// Recall of present-object answers grouped by the IoU of their (image,
/// label) alignment score. `h_vlm`, when non-empty, filters the scores.
IouSplit split_by_iou(std::span<const AlignmentRecord> scores, std::span<const JoinedAnswer> answers,
                      double threshold = kDefaultIouThreshold, const std::string& h_vlm = "");

inline const std::vector<double> kDefaultThetas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};

struct SweepRow {
  double theta = 0.0;
  pope::PopeMetrics metrics;
};

struct CutoffSweep {
  std::vector<SweepRow> rows;
  DeltaTable table;
};

/// One metrics row per theta, in `thetas` order, marked against `baseline`.
/// Throws if any theta lacks an answer set.
CutoffSweep cutoff_sweep(const pope::PopeMetrics& baseline,
                         const std::map<double, std::vector<pope::Judgement>>& answers_by_theta,
                         std::span<const double> thetas = kDefaultThetas);

inline const std::vector<double> kDefaultBinEdges{0.01, 0.05, 0.1, 0.25, 1.0};

struct SizeBin {
  double lo = 0.0;  // exclusive, except the first bin which starts at 0 inclusive
  double hi = 0.0;  // inclusive
  RecallGroup group;
};

/// Recall of present-object answers binned by the ground-truth mask area
/// fraction of their (image, label). Bins are (lo, hi]; the first is [0, e0].
std::vector<SizeBin> size_bins(const coco::Dataset& dataset, std::span<const JoinedAnswer> answers,
                               std::span<const double> bin_edges = kDefaultBinEdges,
                               coco::InstancePolicy policy = coco::InstancePolicy::kUnion);

/// Same binning from precomputed size fractions keyed by (image_id, label).
std::vector<SizeBin> size_bins(const std::map<std::pair<std::int64_t, std::string>, double>& fractions,
                               std::span<const JoinedAnswer> answers,
                               std::span<const double> bin_edges = kDefaultBinEdges);

struct OutcomeAlignment {
  std::string name;
  std::size_t objects = 0;
  std::optional<double> share;
  std::optional<double> precision, recall, iou, mse;  // means over defined scores
};

/// Mean alignment of present objects split by whether the prompted answer
/// was correct.
std::pair<OutcomeAlignment, OutcomeAlignment> alignment_by_outcome(std::span<const AlignmentRecord> scores,
                                                                   std::span<const JoinedAnswer> answers,
                                                                   const std::string& h_vlm = "");

nlohmann::json to_json(const Stratum& s);
nlohmann::json to_json(const RecallGroup& g);
nlohmann::json to_json(const IouSplit& s);
nlohmann::json to_json(const SizeBin& b);
nlohmann::json to_json(const OutcomeAlignment& o);

/// "-" for undefined, otherwise two decimals.
std::string format_value(const std::optional<double>& value);

// Full report driven by loaded inputs.

struct NamedAnswers {
  std::string name;
  std::vector<pope::PopeAnswer> answers;
};

struct ReportInputs {
  std::vector<pope::PopeQuestion> questions;
  NamedAnswers baseline;
  std::vector<NamedAnswers> variants;
  std::optional<std::vector<pope::PopeAnswer>> seg_answers;
  std::optional<std::vector<AlignmentRecord>> alignment;
  std::string h_vlm;
  double iou_threshold = kDefaultIouThreshold;
  std::optional<coco::Dataset> dataset;
  std::vector<double> bin_edges = kDefaultBinEdges;
};

struct Report {
  nlohmann::json json;
  std::string text;
};

Report build_report(const ReportInputs& inputs);

}  // namespace apiprompt::report
