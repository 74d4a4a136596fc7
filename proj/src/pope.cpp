// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/pope.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "apiprompt/error.hpp"
#include "apiprompt/jsonl.hpp"

namespace apiprompt::pope {

using nlohmann::json;

std::string to_string(GroundTruth truth) { return truth == GroundTruth::kPresent ? "present" : "absent"; }

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kYes: return "yes";
    case Verdict::kNo: return "no";
    case Verdict::kUnsure: return "unsure";
  }
  return "unsure";
}

GroundTruth parse_ground_truth(const std::string& text) {
  if (text == "present") return GroundTruth::kPresent;
  if (text == "absent") return GroundTruth::kAbsent;
  throw Error("ground_truth must be 'present' or 'absent', got '" + text + "'");
}

std::string make_prompt(std::string_view label) {
  return "Is there a " + std::string(label) + " in the image? " + std::string(kAnswerSuffix);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SampleRng::SampleRng(std::uint64_t seed, std::int64_t image_id)
    : engine_(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(image_id))) {}

std::uint64_t SampleRng::below(std::uint64_t bound) {
  if (bound == 0) throw Error("SampleRng::below: bound must be positive");
  // Reject the low 2^64 mod bound values so the remainder is unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % bound;
  }
}

std::vector<PopeQuestion> generate_questions(std::int64_t image_id, std::span<const std::string> present_labels,
                                             std::uint64_t seed, std::size_t k_absent) {
  const auto vocab = coco::vocabulary();
  std::set<std::size_t> present;
  for (const auto& label : present_labels) {
    auto idx = coco::label_index(label);
    if (!idx) throw Error("image " + std::to_string(image_id) + ": '" + label + "' is not an MSCOCO label");
    present.insert(*idx);
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (!present.contains(i)) candidates.push_back(i);
  }
  if (candidates.size() < k_absent) {
    throw Error("image " + std::to_string(image_id) + ": only " + std::to_string(candidates.size()) +
                " absent candidates for " + std::to_string(k_absent) + " absent questions");
  }

  std::vector<PopeQuestion> out;
  for (std::size_t i : present) {
    out.push_back({0, image_id, std::string(vocab[i].name), GroundTruth::kPresent, make_prompt(vocab[i].name)});
  }
  // Partial Fisher-Yates over candidates in vocabulary order.
  SampleRng rng(seed, image_id);
  for (std::size_t k = 0; k < k_absent; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(candidates.size() - k));
    std::swap(candidates[k], candidates[j]);
    const auto& name = vocab[candidates[k]].name;
    out.push_back({0, image_id, std::string(name), GroundTruth::kAbsent, make_prompt(name)});
  }
  return out;
}

std::vector<PopeQuestion> generate_for_dataset(const coco::Dataset& dataset, std::uint64_t seed,
                                               std::size_t k_absent) {
  std::vector<PopeQuestion> out;
  for (const auto& [image_id, labels] : dataset.labels) {
    for (auto& q : generate_questions(image_id, labels, seed, k_absent)) {
      q.question_id = static_cast<std::int64_t>(out.size());
      out.push_back(std::move(q));
    }
  }
  return out;
}

Verdict classify_answer(std::string_view raw_text) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  auto begin = std::find_if_not(raw_text.begin(), raw_text.end(), is_space);
  auto end = std::find_if(begin, raw_text.end(), is_space);
  std::string token;
  for (auto it = begin; it != end; ++it) {
    const auto c = static_cast<unsigned char>(*it);
    if (std::ispunct(c)) continue;
    token.push_back(static_cast<char>(std::tolower(c)));
  }
  if (token == "yes") return Verdict::kYes;
  if (token == "no") return Verdict::kNo;
  return Verdict::kUnsure;
}

void Counts::add(GroundTruth truth, Verdict verdict) {
  const bool present = truth == GroundTruth::kPresent;
  switch (verdict) {
    case Verdict::kYes: ++(present ? tp : fp); break;
    case Verdict::kNo: ++(present ? fn : tn); break;
    case Verdict::kUnsure: ++(present ? unsure_pos : unsure_neg); break;
  }
}

Counts& Counts::operator+=(const Counts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  unsure_pos += o.unsure_pos;
  unsure_neg += o.unsure_neg;
  return *this;
}

bool is_correct(const Judgement& j) {
  return j.truth == GroundTruth::kPresent ? j.verdict == Verdict::kYes : j.verdict == Verdict::kNo;
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

PopeMetrics metrics_from_counts(const Counts& c) {
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  PopeMetrics m;
  m.counts = c;
  const auto total = c.total();
  const auto accuracy = ratio(c.tp + c.tn, total);
  const auto precision = ratio(c.tp, c.tp + c.fp);
  const auto recall = ratio(c.tp, c.present());
  const auto tnr = ratio(c.tn, c.absent());
  const auto unsure = ratio(c.unsure_pos + c.unsure_neg, total);
  std::optional<double> f1;
  if (precision && recall) {
    const double sum = *precision + *recall;
    f1 = sum > 0.0 ? 2.0 * *precision * *recall / sum : 0.0;
  }
  auto r = [](std::optional<double> v) { return v ? std::optional<double>(round2(*v)) : std::nullopt; };
  m.accuracy = r(accuracy);
  m.precision = r(precision);
  m.recall = r(recall);
  m.tnr = r(tnr);
  m.f1 = r(f1);
  m.unsure_rate = r(unsure);
  return m;
}

PopeMetrics score(std::span<const Judgement> judgements) {
  if (judgements.empty()) throw Error("score: no answers");
  Counts c;
  for (const auto& j : judgements) c.add(j.truth, j.verdict);
  return metrics_from_counts(c);
}

std::vector<Judgement> link(std::span<const PopeQuestion> questions, std::span<const PopeAnswer> answers) {
  std::map<std::int64_t, GroundTruth> truth;
  for (const auto& q : questions) truth[q.question_id] = q.ground_truth;
  std::vector<Judgement> out;
  out.reserve(answers.size());
  for (const auto& a : answers) {
    auto it = truth.find(a.question_id);
    if (it == truth.end()) throw Error("answer references unknown question " + std::to_string(a.question_id));
    out.push_back({it->second, a.verdict});
  }
  return out;
}

json to_json(const PopeQuestion& q) {
  return {{"question_id", q.question_id}, {"image_id", q.image_id},
          {"label", q.label},             {"ground_truth", to_string(q.ground_truth)},
          {"prompt", q.prompt}};
}

PopeQuestion question_from_json(const json& j) {
  try {
    PopeQuestion q;
    q.question_id = j.at("question_id").get<std::int64_t>();
    q.image_id = j.at("image_id").get<std::int64_t>();
    q.label = j.at("label").get<std::string>();
    q.ground_truth = parse_ground_truth(j.at("ground_truth").get<std::string>());
    q.prompt = j.at("prompt").get<std::string>();
    return q;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed question record: ") + e.what());
  }
}

json to_json(const PopeAnswer& a) { return {{"question_id", a.question_id}, {"raw_text", a.raw_text}}; }

PopeAnswer answer_from_json(const json& j) {
  try {
    PopeAnswer a;
    a.question_id = j.at("question_id").get<std::int64_t>();
    a.raw_text = j.at("raw_text").get<std::string>();
    a.verdict = classify_answer(a.raw_text);
    return a;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed answer record: ") + e.what());
  }
}

json to_json(const PopeMetrics& m) {
  auto v = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  return {{"accuracy", v(m.accuracy)},
          {"precision", v(m.precision)},
          {"recall", v(m.recall)},
          {"tnr", v(m.tnr)},
          {"f1", v(m.f1)},
          {"unsure_rate", v(m.unsure_rate)},
          {"tp", m.counts.tp},
          {"fp", m.counts.fp},
          {"tn", m.counts.tn},
          {"fn", m.counts.fn},
          {"unsure_pos", m.counts.unsure_pos},
          {"unsure_neg", m.counts.unsure_neg},
          {"total", m.counts.total()}};
}

std::vector<PopeQuestion> load_questions(const std::filesystem::path& path) {
  std::vector<PopeQuestion> out;
  std::set<std::int64_t> ids;
  for (const auto& j : read_jsonl(path)) {
    out.push_back(question_from_json(j));
    if (!ids.insert(out.back().question_id).second) {
      throw Error(path.string() + ": duplicate question_id " + std::to_string(out.back().question_id));
    }
  }
  return out;
}

std::vector<PopeAnswer> load_answers(const std::filesystem::path& path) {
  std::vector<PopeAnswer> out;
  for (const auto& j : read_jsonl(path)) out.push_back(answer_from_json(j));
  return out;
}

}  // namespace apiprompt::pope
