// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Polling-based object presence probes: one "present" question per label in
// the image plus k "absent" questions drawn at random from the rest of the
// vocabulary, free-text answer classification and confusion-matrix metrics.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apiprompt/coco.hpp"
#include "json.hpp"

namespace apiprompt::pope {

inline constexpr std::string_view kAnswerSuffix = "Answer Yes, No, or Not Sure";
inline constexpr std::size_t kDefaultAbsentCount = 3;

enum class GroundTruth { kPresent, kAbsent };
enum class Verdict { kYes, kNo, kUnsure };

std::string to_string(GroundTruth truth);
std::string to_string(Verdict verdict);
GroundTruth parse_ground_truth(const std::string& text);

struct PopeQuestion {
  std::int64_t question_id = 0;
  std::int64_t image_id = 0;
  std::string label;
  GroundTruth ground_truth = GroundTruth::kPresent;
  std::string prompt;
};

struct PopeAnswer {
  std::int64_t question_id = 0;
  std::string raw_text;
  Verdict verdict = Verdict::kUnsure;
};

/// "Is there a {label} in the image? Answer Yes, No, or Not Sure"
std::string make_prompt(std::string_view label);

/// Portable RNG for absent-label sampling: std::mt19937_64 seeded with
/// splitmix64(splitmix64(seed) ^ image_id); bounded draws use rejection
/// sampling, never std:: distributions.
class SampleRng {
 public:
  SampleRng(std::uint64_t seed, std::int64_t image_id);
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;  // output sequence fixed by the C++ standard
};

std::uint64_t splitmix64(std::uint64_t x);

/// Present questions in vocabulary order, then `k_absent` absent questions
/// in draw order. question_id is left 0.
std::vector<PopeQuestion> generate_questions(std::int64_t image_id, std::span<const std::string> present_labels,
                                             std::uint64_t seed, std::size_t k_absent = kDefaultAbsentCount);

/// Questions for every image of the dataset in image-id order with
/// sequential question ids starting at 0.
std::vector<PopeQuestion> generate_for_dataset(const coco::Dataset& dataset, std::uint64_t seed,
                                               std::size_t k_absent = kDefaultAbsentCount);

/// Leading token, lowercased, punctuation removed: yes / no / anything else.
Verdict classify_answer(std::string_view raw_text);

struct Counts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0, unsure_pos = 0, unsure_neg = 0;

  std::uint64_t total() const { return tp + fp + tn + fn + unsure_pos + unsure_neg; }
  std::uint64_t present() const { return tp + fn + unsure_pos; }
  std::uint64_t absent() const { return tn + fp + unsure_neg; }
  void add(GroundTruth truth, Verdict verdict);
  Counts& operator+=(const Counts& other);
  bool operator==(const Counts&) const = default;
};

/// Percentages rounded to 2 decimals; nullopt marks a zero denominator.
struct PopeMetrics {
  std::optional<double> accuracy, precision, recall, tnr, f1, unsure_rate;
  Counts counts;
};

struct Judgement {
  GroundTruth truth;
  Verdict verdict;
};

bool is_correct(const Judgement& j);

PopeMetrics metrics_from_counts(const Counts& counts);
/// Throws on empty input.
PopeMetrics score(std::span<const Judgement> judgements);

/// Joins answers to questions by question_id. Throws when an answer names an
/// unknown question.
std::vector<Judgement> link(std::span<const PopeQuestion> questions, std::span<const PopeAnswer> answers);

double round2(double value);

nlohmann::json to_json(const PopeQuestion& q);
PopeQuestion question_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PopeAnswer& a);
/// Verdict is recomputed from raw_text.
PopeAnswer answer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PopeMetrics& m);

std::vector<PopeQuestion> load_questions(const std::filesystem::path& path);
std::vector<PopeAnswer> load_answers(const std::filesystem::path& path);

}  // namespace apiprompt::pope
