// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "apiprompt/error.hpp"

namespace apiprompt::report {

using nlohmann::json;
using pope::GroundTruth;
using pope::Verdict;

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Terminal columns of a UTF-8 string (markers are single-width).
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad_right(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : std::string(width - w, ' ') + s;
}

std::string format_percent(const std::optional<double>& share) {
  if (!share) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f%%", *share);
  return buf;
}

std::string format_edge(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

RecallGroup recall_group(const pope::Counts& c, std::size_t count) {
  RecallGroup g;
  g.count = count;
  g.counts = c;
  g.recall = pope::metrics_from_counts(c).recall;
  return g;
}

std::optional<double> share_of(std::size_t part, std::size_t total) {
  if (total == 0) return std::nullopt;
  return pope::round2(100.0 * static_cast<double>(part) / static_cast<double>(total));
}

}  // namespace

std::string symbol(Marker marker) {
  switch (marker) {
    case Marker::kUp: return "▲";
    case Marker::kDown: return "▽";
    case Marker::kNone: return "";
  }
  return "";
}

Marker compare(const std::optional<double>& variant, const std::optional<double>& baseline, bool higher_is_better) {
  if (!variant && !baseline) return Marker::kNone;
  if (!variant || !baseline) throw Error("delta table: metric defined for only one of variant and baseline");
  const double v = pope::round2(*variant);
  const double b = pope::round2(*baseline);
  if (v == b) return Marker::kNone;
  const bool better = higher_is_better ? v > b : v < b;
  return better ? Marker::kUp : Marker::kDown;
}

std::string format_value(const std::optional<double>& value) {
  if (!value) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", pope::round2(*value));
  return buf;
}

DeltaTable delta_table(std::string title, std::vector<Column> columns, const std::string& baseline_name,
                       std::span<const std::optional<double>> baseline,
                       std::span<const std::pair<std::string, std::vector<std::optional<double>>>> variants) {
  if (baseline.size() != columns.size()) throw Error("delta table: baseline value count differs from columns");
  DeltaTable t;
  t.title = std::move(title);
  t.baseline.name = baseline_name;
  for (const auto& v : baseline) t.baseline.cells.push_back({v, Marker::kNone});
  for (const auto& [name, values] : variants) {
    if (values.size() != columns.size()) throw Error("delta table: row '" + name + "' has wrong value count");
    Row row{name, {}};
    for (std::size_t c = 0; c < columns.size(); ++c) {
      try {
        row.cells.push_back({values[c], compare(values[c], baseline[c], columns[c].higher_is_better)});
      } catch (const Error&) {
        throw Error("delta table: mismatched metric availability for '" + name + "' column " + columns[c].label);
      }
    }
    t.rows.push_back(std::move(row));
  }
  t.columns = std::move(columns);
  return t;
}

std::vector<Column> pope_columns() {
  return {{"accuracy", "Acc.", true}, {"precision", "Prec.", true}, {"recall", "Rec.", true},
          {"tnr", "TNR", true},       {"f1", "F1", true}};
}

std::vector<std::optional<double>> pope_values(const pope::PopeMetrics& m) {
  return {m.accuracy, m.precision, m.recall, m.tnr, m.f1};
}

DeltaTable delta_table(const NamedMetrics& baseline, std::span<const NamedMetrics> variants, std::string title) {
  std::vector<std::pair<std::string, std::vector<std::optional<double>>>> rows;
  for (const auto& [name, m] : variants) rows.emplace_back(name, pope_values(m));
  const auto base = pope_values(baseline.second);
  return delta_table(std::move(title), pope_columns(), baseline.first, base, rows);
}

std::string render_text(const DeltaTable& table) {
  std::size_t name_width = display_width("Prompting");
  name_width = std::max(name_width, display_width(table.baseline.name));
  for (const auto& r : table.rows) name_width = std::max(name_width, display_width(r.name));

  auto cell_text = [](const Cell& c) { return symbol(c.marker) + format_value(c.value); };
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::size_t w = std::max<std::size_t>(display_width(table.columns[c].label), 6);
    w = std::max(w, display_width(cell_text(table.baseline.cells[c])));
    for (const auto& r : table.rows) w = std::max(w, display_width(cell_text(r.cells[c])));
    widths.push_back(w);
  }

  std::ostringstream out;
  if (!table.title.empty()) out << table.title << '\n';
  std::string header = pad_right("Prompting", name_width);
  for (std::size_t c = 0; c < table.columns.size(); ++c) header += "  " + pad_left(table.columns[c].label, widths[c]);
  out << header << '\n' << std::string(display_width(header), '-') << '\n';
  auto emit = [&](const Row& row) {
    out << pad_right(row.name, name_width);
    for (std::size_t c = 0; c < row.cells.size(); ++c) out << "  " << pad_left(cell_text(row.cells[c]), widths[c]);
    out << '\n';
  };
  emit(table.baseline);
  for (const auto& r : table.rows) emit(r);
  return out.str();
}

json to_json(const DeltaTable& table) {
  json cols = json::array();
  for (const auto& c : table.columns) {
    cols.push_back({{"key", c.key}, {"label", c.label}, {"higher_is_better", c.higher_is_better}});
  }
  auto row_json = [&](const Row& r) {
    json cells = json::object();
    json markers = json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      cells[table.columns[c].key] = opt_json(r.cells[c].value ? std::optional(pope::round2(*r.cells[c].value))
                                                              : std::nullopt);
      markers[table.columns[c].key] = symbol(r.cells[c].marker);
    }
    return json{{"name", r.name}, {"values", cells}, {"markers", markers}};
  };
  json rows = json::array();
  for (const auto& r : table.rows) rows.push_back(row_json(r));
  json base = row_json(table.baseline);
  base.erase("markers");
  return {{"title", table.title}, {"columns", cols}, {"baseline", base}, {"rows", rows}};
}

std::vector<JoinedAnswer> join(std::span<const pope::PopeQuestion> questions,
                               std::span<const pope::PopeAnswer> answers) {
  std::map<std::int64_t, const pope::PopeQuestion*> by_id;
  for (const auto& q : questions) by_id[q.question_id] = &q;
  std::vector<JoinedAnswer> out;
  out.reserve(answers.size());
  for (const auto& a : answers) {
    auto it = by_id.find(a.question_id);
    if (it == by_id.end()) throw Error("answer references unknown question " + std::to_string(a.question_id));
    out.push_back({*it->second, a.verdict});
  }
  return out;
}

std::vector<pope::Judgement> judgements(std::span<const JoinedAnswer> answers) {
  std::vector<pope::Judgement> out;
  out.reserve(answers.size());
  for (const auto& a : answers) out.push_back({a.question.ground_truth, a.verdict});
  return out;
}

std::vector<std::int64_t> seg_correct_ids(std::span<const JoinedAnswer> seg_answers) {
  std::vector<std::int64_t> ids;
  for (const auto& a : seg_answers) {
    if (pope::is_correct({a.question.ground_truth, a.verdict})) ids.push_back(a.question.question_id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

SegStratification stratify_by_seg_case(std::span<const JoinedAnswer> seg_answers,
                                       std::span<const JoinedAnswer> variant_answers) {
  std::map<std::int64_t, bool> seg_correct;
  for (const auto& a : seg_answers) {
    const bool ok = pope::is_correct({a.question.ground_truth, a.verdict});
    auto [it, inserted] = seg_correct.emplace(a.question.question_id, ok);
    if (!inserted && it->second != ok) {
      throw Error("segmentation answers disagree for question " + std::to_string(a.question.question_id));
    }
  }
  std::size_t overlap = 0;
  for (const auto& a : variant_answers) overlap += seg_correct.contains(a.question.question_id);
  if (overlap == 0) throw Error("stratify_by_seg_case: answer sets share no question ids");

  pope::Counts correct, incorrect;
  std::size_t ncorrect = 0, nincorrect = 0;
  for (const auto& a : variant_answers) {
    auto it = seg_correct.find(a.question.question_id);
    if (it == seg_correct.end()) {
      throw Error("stratify_by_seg_case: question " + std::to_string(a.question.question_id) +
                  " has no segmentation answer");
    }
    if (it->second) {
      correct.add(a.question.ground_truth, a.verdict);
      ++ncorrect;
    } else {
      incorrect.add(a.question.ground_truth, a.verdict);
      ++nincorrect;
    }
  }
  const std::size_t total = ncorrect + nincorrect;
  SegStratification s;
  s.correct = {"Correct", ncorrect, share_of(ncorrect, total), pope::metrics_from_counts(correct)};
  s.incorrect = {"Incorrect", nincorrect, share_of(nincorrect, total), pope::metrics_from_counts(incorrect)};
  return s;
}

IouSplit split_by_iou(std::span<const AlignmentRecord> scores, std::span<const JoinedAnswer> answers,
                      double threshold, const std::string& h_vlm) {
  std::map<std::pair<std::int64_t, std::string>, double> iou;
  for (const auto& s : scores) {
    if (!h_vlm.empty() && s.h_vlm != h_vlm) continue;
    if (!s.score.iou) continue;
    auto [it, inserted] = iou.emplace(std::make_pair(s.image_id, s.label), *s.score.iou);
    if (!inserted && it->second != *s.score.iou) {
      throw Error("split_by_iou: conflicting scores for image " + std::to_string(s.image_id) + " label '" +
                  s.label + "'");
    }
  }
  IouSplit out;
  out.threshold = threshold;
  pope::Counts hi, lo;
  std::size_t nhi = 0, nlo = 0;
  for (const auto& a : answers) {
    if (a.question.ground_truth != GroundTruth::kPresent) continue;
    auto it = iou.find({a.question.image_id, a.question.label});
    if (it == iou.end()) {
      ++out.unmatched;
      continue;
    }
    if (it->second >= threshold) {
      hi.add(a.question.ground_truth, a.verdict);
      ++nhi;
    } else {
      lo.add(a.question.ground_truth, a.verdict);
      ++nlo;
    }
  }
  out.at_or_above = recall_group(hi, nhi);
  out.below = recall_group(lo, nlo);
  return out;
}

CutoffSweep cutoff_sweep(const pope::PopeMetrics& baseline,
                         const std::map<double, std::vector<pope::Judgement>>& answers_by_theta,
                         std::span<const double> thetas) {
  CutoffSweep sweep;
  std::vector<NamedMetrics> named;
  for (double theta : thetas) {
    auto it = answers_by_theta.find(theta);
    if (it == answers_by_theta.end()) throw Error("cutoff_sweep: no answer set for theta " + format_edge(theta));
    SweepRow row{theta, pope::score(it->second)};
    named.emplace_back(theta == 0.0 ? std::string("w/o cutoff") : "cutoff " + format_edge(theta), row.metrics);
    sweep.rows.push_back(std::move(row));
  }
  sweep.table = delta_table({"w/o prpt.", baseline}, named, "Cutoff sweep");
  return sweep;
}

std::vector<SizeBin> size_bins(const std::map<std::pair<std::int64_t, std::string>, double>& fractions,
                               std::span<const JoinedAnswer> answers, std::span<const double> bin_edges) {
  if (bin_edges.empty()) throw Error("size_bins: no bin edges");
  for (std::size_t i = 0; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > 0.0) || (i > 0 && bin_edges[i] <= bin_edges[i - 1])) {
      throw Error("size_bins: edges must be positive and strictly increasing");
    }
  }
  if (bin_edges.back() < 1.0) throw Error("size_bins: last edge must be at least 1.0");

  std::vector<pope::Counts> counts(bin_edges.size());
  std::vector<std::size_t> sizes(bin_edges.size(), 0);
  for (const auto& a : answers) {
    if (a.question.ground_truth != GroundTruth::kPresent) continue;
    auto it = fractions.find({a.question.image_id, a.question.label});
    if (it == fractions.end()) {
      throw Error("size_bins: no size for image " + std::to_string(a.question.image_id) + " label '" +
                  a.question.label + "'");
    }
    const auto bin = static_cast<std::size_t>(
        std::lower_bound(bin_edges.begin(), bin_edges.end(), it->second) - bin_edges.begin());
    counts[bin].add(a.question.ground_truth, a.verdict);
    ++sizes[bin];
  }
  std::vector<SizeBin> out;
  for (std::size_t i = 0; i < bin_edges.size(); ++i) {
    out.push_back({i == 0 ? 0.0 : bin_edges[i - 1], bin_edges[i], recall_group(counts[i], sizes[i])});
  }
  return out;
}

std::vector<SizeBin> size_bins(const coco::Dataset& dataset, std::span<const JoinedAnswer> answers,
                               std::span<const double> bin_edges, coco::InstancePolicy policy) {
  std::map<std::pair<std::int64_t, std::string>, double> fractions;
  for (const auto& a : answers) {
    if (a.question.ground_truth != GroundTruth::kPresent) continue;
    auto key = std::make_pair(a.question.image_id, a.question.label);
    if (fractions.contains(key)) continue;
    fractions[key] = coco::mask_fraction(coco::label_mask(dataset, key.first, key.second, policy));
  }
  return size_bins(fractions, answers, bin_edges);
}

std::pair<OutcomeAlignment, OutcomeAlignment> alignment_by_outcome(std::span<const AlignmentRecord> scores,
                                                                   std::span<const JoinedAnswer> answers,
                                                                   const std::string& h_vlm) {
  std::map<std::pair<std::int64_t, std::string>, const AlignmentScore*> by_key;
  for (const auto& s : scores) {
    if (!h_vlm.empty() && s.h_vlm != h_vlm) continue;
    by_key[{s.image_id, s.label}] = &s.score;
  }
  struct Acc {
    std::size_t n = 0;
    double sum[4] = {0, 0, 0, 0};
    std::size_t defined[4] = {0, 0, 0, 0};
    void add(const AlignmentScore& s) {
      ++n;
      const std::optional<double> v[4] = {s.precision, s.recall, s.iou, s.mse};
      for (int k = 0; k < 4; ++k) {
        if (v[k]) {
          sum[k] += *v[k];
          ++defined[k];
        }
      }
    }
    std::optional<double> mean(int k) const {
      if (defined[k] == 0) return std::nullopt;
      return sum[k] / static_cast<double>(defined[k]);
    }
  } ok, bad;
  for (const auto& a : answers) {
    if (a.question.ground_truth != GroundTruth::kPresent) continue;
    auto it = by_key.find({a.question.image_id, a.question.label});
    if (it == by_key.end()) continue;
    (pope::is_correct({a.question.ground_truth, a.verdict}) ? ok : bad).add(*it->second);
  }
  auto finish = [&](const char* name, const Acc& acc) {
    OutcomeAlignment o;
    o.name = name;
    o.objects = acc.n;
    o.share = share_of(acc.n, ok.n + bad.n);
    o.precision = acc.mean(0);
    o.recall = acc.mean(1);
    o.iou = acc.mean(2);
    o.mse = acc.mean(3);
    return o;
  };
  return {finish("Correct", ok), finish("Incorrect", bad)};
}

json to_json(const Stratum& s) {
  return {{"name", s.name}, {"questions", s.questions}, {"share", opt_json(s.share)}, {"metrics", pope::to_json(s.metrics)}};
}

json to_json(const RecallGroup& g) {
  return {{"count", g.count}, {"recall", opt_json(g.recall)}, {"tp", g.counts.tp}, {"fn", g.counts.fn},
          {"unsure_pos", g.counts.unsure_pos}};
}

json to_json(const IouSplit& s) {
  return {{"threshold", s.threshold}, {"at_or_above", to_json(s.at_or_above)}, {"below", to_json(s.below)},
          {"unmatched", s.unmatched}};
}

json to_json(const SizeBin& b) {
  json j = to_json(b.group);
  j["lo"] = b.lo;
  j["hi"] = b.hi;
  return j;
}

json to_json(const OutcomeAlignment& o) {
  auto r = [](const std::optional<double>& v) { return v ? json(pope::round2(*v)) : json(nullptr); };
  return {{"name", o.name},           {"objects", o.objects}, {"share", opt_json(o.share)},
          {"precision", r(o.precision)}, {"recall", r(o.recall)}, {"iou", r(o.iou)},
          {"mse", r(o.mse)}};
}

Report build_report(const ReportInputs& in) {
  Report rep;
  std::ostringstream text;
  json& j = rep.json;
  j["notes"] = {"Unsure answers count toward accuracy, recall and TNR denominators; never toward precision.",
                "Markers compare values rounded to two decimals: ▲ better than baseline, ▽ worse."};

  std::vector<std::pair<std::string, std::vector<JoinedAnswer>>> runs;
  runs.emplace_back(in.baseline.name, join(in.questions, in.baseline.answers));
  for (const auto& v : in.variants) runs.emplace_back(v.name, join(in.questions, v.answers));

  // POPE overview.
  std::vector<NamedMetrics> variant_metrics;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    variant_metrics.emplace_back(runs[i].first, pope::score(judgements(runs[i].second)));
  }
  NamedMetrics base{runs[0].first, pope::score(judgements(runs[0].second))};
  DeltaTable overview = delta_table(base, variant_metrics, "POPE results");
  j["pope"] = to_json(overview);
  json per_run = json::array();
  per_run.push_back({{"name", base.first}, {"metrics", pope::to_json(base.second)}});
  for (const auto& [name, m] : variant_metrics) per_run.push_back({{"name", name}, {"metrics", pope::to_json(m)}});
  j["metrics"] = per_run;
  text << render_text(overview);

  std::optional<std::vector<JoinedAnswer>> seg;
  std::set<std::int64_t> seg_ok;
  if (in.seg_answers) {
    seg = join(in.questions, *in.seg_answers);
    for (auto id : seg_correct_ids(*seg)) seg_ok.insert(id);
    json strata = json::object();
    for (int which = 0; which < 2; ++which) {
      std::vector<SegStratification> parts;
      for (const auto& run : runs) parts.push_back(stratify_by_seg_case(*seg, run.second));
      const Stratum& first = which == 0 ? parts[0].correct : parts[0].incorrect;
      std::vector<NamedMetrics> vs;
      for (std::size_t i = 1; i < runs.size(); ++i) {
        vs.emplace_back(runs[i].first, which == 0 ? parts[i].correct.metrics : parts[i].incorrect.metrics);
      }
      DeltaTable t = delta_table({runs[0].first, first.metrics}, vs,
                                 "Segmentation prompting " + first.name + " (" + format_percent(first.share) + ")");
      strata[which == 0 ? "correct" : "incorrect"] = {
          {"questions", first.questions}, {"share", opt_json(first.share)}, {"table", to_json(t)}};
      text << '\n' << render_text(t);
    }
    j["seg_stratification"] = strata;
  }

  if (in.alignment) {
    json split = json::array();
    text << "\nIoU split (threshold " << format_edge(in.iou_threshold) << ", present objects"
         << (seg ? ", segmentation prompting correct" : "") << ")\n";
    for (const auto& [name, answers] : runs) {
      std::vector<JoinedAnswer> subset;
      for (const auto& a : answers) {
        if (!seg || seg_ok.contains(a.question.question_id)) subset.push_back(a);
      }
      IouSplit s = split_by_iou(*in.alignment, subset, in.iou_threshold, in.h_vlm);
      json entry = to_json(s);
      entry["name"] = name;
      split.push_back(entry);
      text << "  " << pad_right(name, 24) << " IoU >= " << format_edge(in.iou_threshold) << ": Rec "
           << format_value(s.at_or_above.recall) << " (n=" << s.at_or_above.count << ")   IoU < "
           << format_edge(in.iou_threshold) << ": Rec " << format_value(s.below.recall) << " (n=" << s.below.count
           << ")\n";
    }
    j["iou_split"] = split;

    json outcome = json::array();
    text << "\nAlignment by prompted outcome" << (in.h_vlm.empty() ? "" : " (" + in.h_vlm + ")") << '\n';
    std::vector<Column> cols{{"precision", "Prec.", true}, {"recall", "Rec.", true}, {"iou", "IoU", true},
                             {"mse", "MSE", false}};
    for (std::size_t i = 1; i < runs.size(); ++i) {
      auto [ok, bad] = alignment_by_outcome(*in.alignment, runs[i].second, in.h_vlm);
      std::vector<std::optional<double>> bad_values{bad.precision, bad.recall, bad.iou, bad.mse};
      std::vector<std::pair<std::string, std::vector<std::optional<double>>>> rows{
          {"Correct (" + format_percent(ok.share) + ")", {ok.precision, ok.recall, ok.iou, ok.mse}}};
      DeltaTable t;
      if (ok.objects > 0 && bad.objects > 0) {
        t = delta_table(runs[i].first, cols, "Incorrect (" + format_percent(bad.share) + ")", bad_values, rows);
      } else {
        // One outcome has no objects: nothing to compare, so leave the rows unmarked.
        t.title = runs[i].first;
        t.columns = cols;
        t.baseline.name = "Incorrect (" + format_percent(bad.share) + ")";
        for (const auto& v : bad_values) t.baseline.cells.push_back({v, Marker::kNone});
        Row row{rows[0].first, {}};
        for (const auto& v : rows[0].second) row.cells.push_back({v, Marker::kNone});
        t.rows.push_back(std::move(row));
      }
      outcome.push_back({{"name", runs[i].first}, {"correct", to_json(ok)}, {"incorrect", to_json(bad)}});
      text << render_text(t);
    }
    j["alignment_by_outcome"] = outcome;
  }

  if (in.dataset) {
    json bins = json::array();
    text << "\nRecall by object size (mask area fraction; edges";
    for (double e : in.bin_edges) text << ' ' << format_edge(e);
    text << ")\n";
    for (const auto& [name, answers] : runs) {
      auto b = size_bins(*in.dataset, answers, in.bin_edges);
      json groups = json::array();
      text << "  " << pad_right(name, 24);
      for (std::size_t i = 0; i < b.size(); ++i) {
        const auto& bin = b[i];
        groups.push_back(to_json(bin));
        text << ' ' << (i == 0 ? '[' : '(') << format_edge(bin.lo) << "," << format_edge(bin.hi) << "]: " << format_value(bin.group.recall)
             << " n=" << bin.group.count << ";";
      }
      text << '\n';
      bins.push_back({{"name", name}, {"bins", groups}});
    }
    j["size_bins"] = {{"edges", in.bin_edges}, {"runs", bins}};
  }

  rep.text = text.str();
  return rep;
}

}  // namespace apiprompt::report
