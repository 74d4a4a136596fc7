// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/report.hpp"

#include <random>

#include "apiprompt/error.hpp"
#include "apiprompt/jsonl.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace apiprompt;
using namespace apiprompt::report;
using pope::GroundTruth;
using pope::Verdict;

namespace {

pope::PopeQuestion question(std::int64_t id, GroundTruth t, std::int64_t image = 1, std::string label = "dog") {
  return {id, image, std::move(label), t, pope::make_prompt("dog")};
}

JoinedAnswer joined(std::int64_t id, GroundTruth t, Verdict v, std::int64_t image = 1, std::string label = "dog") {
  return {question(id, t, image, std::move(label)), v};
}

pope::PopeMetrics metrics(std::optional<double> acc, std::optional<double> prec, std::optional<double> rec,
                          std::optional<double> tnr, std::optional<double> f1) {
  pope::PopeMetrics m;
  m.accuracy = acc;
  m.precision = prec;
  m.recall = rec;
  m.tnr = tnr;
  m.f1 = f1;
  return m;
}

}  // namespace

TEST_CASE("markers") {
  CHECK(compare(86.52, 86.23) == Marker::kUp);
  CHECK(compare(71.78, 89.19) == Marker::kDown);
  CHECK(compare(50.0, 50.0) == Marker::kNone);
  CHECK(compare(28.46, 30.0, false) == Marker::kUp);
  CHECK(compare(std::nullopt, std::nullopt) == Marker::kNone);
  CHECK_THROWS_AS(compare(1.0, std::nullopt), Error);
  // Values equal at the printed precision are unmarked.
  CHECK(compare(86.231, 86.229) == Marker::kNone);
  CHECK(symbol(Marker::kUp) == "▲");
  CHECK(symbol(Marker::kDown) == "▽");
}

TEST_CASE("delta_table marks variants against the baseline") {
  NamedMetrics base{"w/o prpt.", metrics(86.23, 84.21, 89.19, 83.27, 86.63)};
  std::vector<NamedMetrics> vs{{"API (CLIP)", metrics(86.52, 84.78, 89.02, 84.02, 86.85)},
                               {"same", base.second}};
  auto t = delta_table(base, vs);
  REQUIRE(t.rows.size() == 2);
  std::vector<Marker> expected{Marker::kUp, Marker::kUp, Marker::kDown, Marker::kUp, Marker::kUp};
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(t.rows[0].cells[c].marker == expected[c]);
    CHECK(t.rows[1].cells[c].marker == Marker::kNone);
  }
  auto text = render_text(t);
  CHECK(text.find("▲86.52") != std::string::npos);
  CHECK(text.find("▽89.02") != std::string::npos);
  auto j = to_json(t);
  CHECK(j["rows"][0]["markers"]["recall"] == "▽");
  CHECK(j["baseline"]["values"]["f1"] == 86.63);

  std::vector<NamedMetrics> bad{{"seg", metrics(std::nullopt, 84.0, 71.78, 80.0, 80.0)}};
  CHECK_THROWS_WITH_AS(delta_table(base, bad), doctest::Contains("mismatched"), Error);
}

TEST_CASE("property: swapping baseline and variant flips every marker") {
  std::mt19937_64 rng(83);
  std::uniform_int_distribution<int> value(9000, 9010);  // narrow range forces ties
  for (int trial = 0; trial < 500; ++trial) {
    auto draw = [&] {
      std::vector<std::optional<double>> v;
      for (int c = 0; c < 5; ++c) v.push_back(value(rng) / 100.0);
      return v;
    };
    auto a = draw();
    auto b = draw();
    auto cols = pope_columns();
    cols[4].higher_is_better = trial % 2 == 0;
    std::vector<std::pair<std::string, std::vector<std::optional<double>>>> ra{{"a", a}}, rb{{"b", b}};
    auto ab = delta_table("", cols, "b", b, ra);
    auto ba = delta_table("", cols, "a", a, rb);
    for (std::size_t c = 0; c < 5; ++c) {
      const Marker m = ab.rows[0].cells[c].marker;
      const Marker flipped = m == Marker::kUp ? Marker::kDown : m == Marker::kDown ? Marker::kUp : Marker::kNone;
      CHECK(ba.rows[0].cells[c].marker == flipped);
    }
  }
}

TEST_CASE("stratify_by_seg_case on a 10-question fixture") {
  // Segmentation run: questions 0-6 correct, 7-9 wrong.
  std::vector<JoinedAnswer> seg, variant;
  for (int i = 0; i < 10; ++i) {
    const auto truth = i % 2 == 0 ? GroundTruth::kPresent : GroundTruth::kAbsent;
    const bool right = i < 7;
    const Verdict correct = truth == GroundTruth::kPresent ? Verdict::kYes : Verdict::kNo;
    const Verdict wrong = truth == GroundTruth::kPresent ? Verdict::kNo : Verdict::kYes;
    seg.push_back(joined(i, truth, right ? correct : wrong));
  }
  // Variant: right on 0-4 and 8, wrong on 5, 6, 9, unsure on 7.
  const std::vector<int> variant_ok{0, 1, 2, 3, 4, 8};
  for (int i = 0; i < 10; ++i) {
    const auto truth = seg[i].question.ground_truth;
    Verdict v;
    if (i == 7) {
      v = Verdict::kUnsure;
    } else if (std::find(variant_ok.begin(), variant_ok.end(), i) != variant_ok.end()) {
      v = truth == GroundTruth::kPresent ? Verdict::kYes : Verdict::kNo;
    } else {
      v = truth == GroundTruth::kPresent ? Verdict::kNo : Verdict::kYes;
    }
    variant.push_back(joined(i, truth, v));
  }
  auto s = stratify_by_seg_case(seg, variant);
  CHECK(s.correct.questions == 7);
  CHECK(s.incorrect.questions == 3);
  CHECK(s.correct.share == 70.0);
  CHECK(s.correct.questions + s.incorrect.questions == variant.size());
  // Correct stratum, questions 0-6: present 0,2,4,6 -> tp 3, fn 1 (6); absent 1,3,5 -> tn 2, fp 1 (5).
  CHECK(s.correct.metrics.counts.tp == 3);
  CHECK(s.correct.metrics.counts.fn == 1);
  CHECK(s.correct.metrics.counts.tn == 2);
  CHECK(s.correct.metrics.counts.fp == 1);
  CHECK(s.correct.metrics.accuracy == pope::round2(500.0 / 7));
  CHECK(s.correct.metrics.precision == 75.0);
  CHECK(s.correct.metrics.recall == 75.0);
  CHECK(s.correct.metrics.tnr == pope::round2(200.0 / 3));
  // Incorrect stratum, questions 7-9: 7 absent unsure, 8 present yes, 9 absent yes.
  CHECK(s.incorrect.metrics.counts.tp == 1);
  CHECK(s.incorrect.metrics.counts.fp == 1);
  CHECK(s.incorrect.metrics.counts.unsure_neg == 1);
  CHECK(s.incorrect.metrics.accuracy == pope::round2(100.0 / 3));
  CHECK(s.incorrect.metrics.precision == 50.0);
  CHECK(s.incorrect.metrics.recall == 100.0);
  CHECK(s.incorrect.metrics.tnr == 0.0);

  auto all = stratify_by_seg_case(variant, variant);
  CHECK(all.correct.questions + all.incorrect.questions == 10);

  std::vector<JoinedAnswer> all_right;
  for (const auto& a : seg) all_right.push_back({a.question, a.question.ground_truth == GroundTruth::kPresent ? Verdict::kYes : Verdict::kNo});
  auto full = stratify_by_seg_case(all_right, variant);
  CHECK(full.correct.share == 100.0);
  CHECK(full.incorrect.questions == 0);
  CHECK(!full.incorrect.metrics.accuracy.has_value());

  std::vector<JoinedAnswer> other{joined(100, GroundTruth::kPresent, Verdict::kYes)};
  CHECK_THROWS_AS(stratify_by_seg_case(other, variant), Error);
  std::vector<JoinedAnswer> partial(seg.begin(), seg.begin() + 5);
  CHECK_THROWS_AS(stratify_by_seg_case(partial, variant), Error);
}

TEST_CASE("split_by_iou") {
  std::vector<AlignmentRecord> scores{{1, "dog", "clip", {0, 0, 5.0, 0}}, {2, "dog", "clip", {0, 0, 15.0, 0}}};
  std::vector<JoinedAnswer> answers{joined(0, GroundTruth::kPresent, Verdict::kYes, 1),
                                    joined(1, GroundTruth::kPresent, Verdict::kNo, 2),
                                    joined(2, GroundTruth::kAbsent, Verdict::kNo, 1, "cat")};
  auto s = split_by_iou(scores, answers);
  CHECK(s.at_or_above.count == 1);
  CHECK(s.below.count == 1);
  CHECK(s.at_or_above.recall == 0.0);
  CHECK(s.below.recall == 100.0);
  CHECK(s.unmatched == 0);

  std::vector<AlignmentRecord> perfect{{1, "dog", "clip", {100, 100, 100.0, 0}}, {2, "dog", "clip", {100, 100, 100.0, 0}}};
  auto p = split_by_iou(perfect, answers);
  CHECK(p.at_or_above.count == 2);
  CHECK(!p.below.recall.has_value());
  // Exactly at the threshold counts as at-or-above.
  std::vector<AlignmentRecord> edge{{1, "dog", "clip", {0, 0, 10.0, 0}}};
  auto e = split_by_iou(edge, answers);
  CHECK(e.at_or_above.count == 1);
  CHECK(e.unmatched == 1);
  CHECK(split_by_iou(scores, answers, 10.0, "llava").unmatched == 2);
}

TEST_CASE("split_by_iou on a hand-folded fixture") {
  std::vector<AlignmentRecord> scores;
  std::vector<JoinedAnswer> answers;
  // IoU: 0, 4, 9.99, 10, 12, 40, 80; verdicts Y N Y Y N Y U
  const double ious[] = {0, 4, 9.99, 10, 12, 40, 80};
  const Verdict vs[] = {Verdict::kYes, Verdict::kNo, Verdict::kYes, Verdict::kYes, Verdict::kNo, Verdict::kYes,
                        Verdict::kUnsure};
  for (int i = 0; i < 7; ++i) {
    scores.push_back({i, "cat", "clip", {0, 0, ious[i], 0}});
    answers.push_back(joined(i, GroundTruth::kPresent, vs[i], i, "cat"));
  }
  auto s = split_by_iou(scores, answers);
  CHECK(s.below.count == 3);
  CHECK(s.below.recall == pope::round2(200.0 / 3));
  CHECK(s.at_or_above.count == 4);
  CHECK(s.at_or_above.recall == 50.0);
}

TEST_CASE("size bins") {
  std::map<std::pair<std::int64_t, std::string>, double> half{{{1, "dog"}, 0.5}};
  std::vector<JoinedAnswer> one{joined(0, GroundTruth::kPresent, Verdict::kYes)};
  auto b = size_bins(half, one);
  REQUIRE(b.size() == 5);
  CHECK(b[4].group.count == 1);
  CHECK(b[4].lo == 0.25);
  for (int i = 0; i < 4; ++i) CHECK(!b[i].group.recall.has_value());

  std::map<std::pair<std::int64_t, std::string>, double> edge{{{1, "dog"}, 0.05}};
  CHECK(size_bins(edge, one)[1].group.count == 1);
  std::map<std::pair<std::int64_t, std::string>, double> zero{{{1, "dog"}, 0.0}};
  CHECK(size_bins(zero, one)[0].group.count == 1);

  std::vector<double> bad{0.1, 0.05, 1.0};
  CHECK_THROWS_AS(size_bins(half, one, bad), Error);
  std::vector<double> short_edges{0.1, 0.5};
  CHECK_THROWS_AS(size_bins(half, one, short_edges), Error);
  std::map<std::pair<std::int64_t, std::string>, double> none;
  CHECK_THROWS_AS(size_bins(none, one), Error);
}

TEST_CASE("size bins on a 20-object fixture") {
  // Four objects per bin; bin k gets k+... correct answers as folded below.
  const double fractions[] = {0.001, 0.005, 0.01,  0.0099,  // [0, 0.01]
                              0.02,  0.05,  0.011, 0.03,    // (0.01, 0.05]
                              0.06,  0.1,   0.07,  0.09,    // (0.05, 0.1]
                              0.2,   0.25,  0.11,  0.15,    // (0.1, 0.25]
                              0.5,   1.0,   0.26,  0.9};    // (0.25, 1]
  // Per bin: number of Yes answers among its four objects (rest No, one Unsure in bin 2).
  const int yes_per_bin[] = {1, 2, 2, 3, 4};
  std::map<std::pair<std::int64_t, std::string>, double> fr;
  std::vector<JoinedAnswer> answers;
  for (int i = 0; i < 20; ++i) {
    fr[{i, "cat"}] = fractions[i];
    const int bin = i / 4, pos = i % 4;
    Verdict v = pos < yes_per_bin[bin] ? Verdict::kYes : Verdict::kNo;
    if (bin == 2 && pos == 3) v = Verdict::kUnsure;
    answers.push_back(joined(i, GroundTruth::kPresent, v, i, "cat"));
  }
  answers.push_back(joined(20, GroundTruth::kAbsent, Verdict::kYes, 0, "zebra"));  // ignored
  auto bins = size_bins(fr, answers);
  const double expected[] = {25.0, 50.0, 50.0, 75.0, 100.0};
  std::size_t total = 0;
  for (int k = 0; k < 5; ++k) {
    CHECK(bins[k].group.count == 4);
    CHECK(bins[k].group.recall == expected[k]);
    total += bins[k].group.count;
  }
  CHECK(total == 20);
  CHECK(bins[2].group.counts.unsure_pos == 1);
}

TEST_CASE("cutoff sweep") {
  std::vector<pope::Judgement> base{{GroundTruth::kPresent, Verdict::kYes}, {GroundTruth::kPresent, Verdict::kNo},
                                    {GroundTruth::kAbsent, Verdict::kYes}};
  std::map<double, std::vector<pope::Judgement>> by_theta;
  for (double t : kDefaultThetas) {
    by_theta[t] = {{GroundTruth::kPresent, t >= 0.3 ? Verdict::kYes : Verdict::kNo},
                   {GroundTruth::kPresent, t >= 0.5 ? Verdict::kYes : Verdict::kNo},
                   {GroundTruth::kAbsent, Verdict::kYes}};
  }
  auto sweep = cutoff_sweep(pope::score(base), by_theta);
  REQUIRE(sweep.rows.size() == 6);
  CHECK(sweep.rows[0].theta == 0.0);
  CHECK(sweep.table.rows[0].name == "w/o cutoff");
  CHECK(sweep.table.rows[5].name == "cutoff 0.5");
  CHECK(sweep.rows[0].metrics.recall == 0.0);
  CHECK(sweep.table.rows[0].cells[2].marker == Marker::kDown);
  CHECK(sweep.table.rows[3].cells[2].marker == Marker::kNone);
  CHECK(sweep.table.rows[5].cells[2].marker == Marker::kUp);
  by_theta.erase(0.4);
  CHECK_THROWS_WITH_AS(cutoff_sweep(pope::score(base), by_theta), doctest::Contains("0.4"), Error);
}

TEST_CASE("alignment by outcome") {
  std::vector<AlignmentRecord> scores{{1, "dog", "clip", {40, 60, 30, 10}}, {2, "dog", "clip", {20, 40, 10, 30}},
                                      {3, "dog", "clip", {60, 80, 50, 20}}};
  std::vector<JoinedAnswer> answers{joined(0, GroundTruth::kPresent, Verdict::kYes, 1),
                                    joined(1, GroundTruth::kPresent, Verdict::kNo, 2),
                                    joined(2, GroundTruth::kPresent, Verdict::kYes, 3)};
  auto [ok, bad] = alignment_by_outcome(scores, answers);
  CHECK(ok.objects == 2);
  CHECK(ok.iou == 40.0);
  CHECK(ok.mse == 15.0);
  CHECK(bad.objects == 1);
  CHECK(bad.precision == 20.0);
  CHECK(ok.share == pope::round2(200.0 / 3));
}

TEST_CASE("build_report replays the recorded corpus tables") {
  const auto dir = testutil::fixtures() / "corpus";
  auto expected = nlohmann::json::parse(read_text_file(dir / "expected.json"));
  ReportInputs in;
  in.questions = pope::load_questions(dir / "questions.jsonl");
  in.baseline = {"w/o prpt.", pope::load_answers(dir / "answers" / "baseline.jsonl")};
  in.variants.push_back({"API (CLIP) w Cutoff", pope::load_answers(dir / "answers" / "api_clip_cutoff.jsonl")});
  in.seg_answers = pope::load_answers(dir / "answers" / "seg.jsonl");
  auto rep = build_report(in);
  const auto& table = rep.json["pope"];
  CHECK(table["baseline"]["values"] == expected["pope"]["baseline"]["values"]);
  CHECK(table["rows"][0]["values"] == expected["pope"]["rows"][0]["values"]);
  CHECK(table["rows"][0]["markers"] == expected["pope"]["rows"][0]["markers"]);
  const auto& strata = rep.json["seg_stratification"];
  CHECK(strata["correct"]["questions"].get<std::size_t>() + strata["incorrect"]["questions"].get<std::size_t>() ==
        expected["questions"].get<std::size_t>());

  const auto qs = in.questions;
  std::map<double, std::vector<pope::Judgement>> by_theta;
  for (double t : kDefaultThetas) {
    char name[64];
    std::snprintf(name, sizeof name, "seg_theta_%.1f.jsonl", t);
    by_theta[t] = pope::link(qs, pope::load_answers(dir / "answers" / name));
  }
  auto sweep = cutoff_sweep(pope::score(pope::link(qs, in.baseline.answers)), by_theta);
  auto sj = to_json(sweep.table);
  REQUIRE(sj["rows"].size() == expected["sweep"]["rows"].size());
  for (std::size_t i = 0; i < sj["rows"].size(); ++i) {
    CHECK(sj["rows"][i]["name"] == expected["sweep"]["rows"][i]["name"]);
    CHECK(sj["rows"][i]["values"] == expected["sweep"]["rows"][i]["values"]);
    CHECK(sj["rows"][i]["markers"] == expected["sweep"]["rows"][i]["markers"]);
  }
  // Theta 0 equals the uncut segmentation run.
  CHECK(sj["rows"][0]["values"] == to_json(delta_table({"b", pope::score(pope::link(qs, *in.seg_answers))}, {}))["baseline"]["values"]);
}

TEST_CASE("build_report tolerates an outcome group without alignment scores") {
  std::vector<pope::PopeQuestion> qs{question(0, GroundTruth::kPresent), question(1, GroundTruth::kAbsent, 1, "cat")};
  ReportInputs in;
  in.questions = qs;
  in.baseline = {"base", {{0, "No", Verdict::kNo}, {1, "Yes", Verdict::kYes}}};
  in.variants.push_back({"v", {{0, "Yes", Verdict::kYes}, {1, "No", Verdict::kNo}}});
  in.alignment = std::vector<AlignmentRecord>{{1, "dog", "clip", {50, 50, 40, 20}}};
  auto rep = build_report(in);
  const auto& outcome = rep.json["alignment_by_outcome"][0];
  CHECK(outcome["correct"]["objects"] == 1);
  CHECK(outcome["incorrect"]["iou"].is_null());
  CHECK(rep.text.find("Correct (100%)") != std::string::npos);
}
