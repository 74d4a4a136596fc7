// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

// apiprompt: attention prompting and object-hallucination evaluation.
//
//   apiprompt attribute --manifest exp/ --kind clip --out map/
//   apiprompt compose   --map map/ --image in.png --mode black --cutoff 0.5 --out out.png
//   apiprompt masks     --annotations instances.json --out masks/
//   apiprompt pope gen  --annotations instances.json --seed 0 --out questions.jsonl
//   apiprompt pope score --questions questions.jsonl --answers answers.jsonl
//   apiprompt align     --annotations instances.json --jobs jobs.jsonl --out scores.jsonl
//   apiprompt report    --config report.json --json report.json --text report.txt
//   apiprompt sweep     --questions q.jsonl --baseline a.jsonl --theta 0=a0.jsonl ...
//
// Every option can also come from `--config <json>`: keys of the object named
// after the subcommand, then top-level keys, fill options not given on the
// command line. Relative paths in the config resolve against its directory.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apiprompt/alignment.hpp"
#include "apiprompt/attribution.hpp"
#include "apiprompt/coco.hpp"
#include "apiprompt/compositor.hpp"
#include "apiprompt/error.hpp"
#include "apiprompt/jsonl.hpp"
#include "apiprompt/png_io.hpp"
#include "apiprompt/pope.hpp"
#include "apiprompt/report.hpp"
#include "apiprompt/tensor_exchange.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace apiprompt;

namespace {

struct Config {
  json root = json::object();
  fs::path base;

  // Subcommand section first, then the top level.
  const json* lookup(const std::string& section, const std::string& key) const {
    if (!section.empty() && root.contains(section) && root[section].is_object() && root[section].contains(key)) {
      return &root[section][key];
    }
    if (root.contains(key) && !root[key].is_object()) return &root[key];
    return nullptr;
  }

  std::string path(const std::string& p) const {
    if (p.empty() || fs::path(p).is_absolute() || base.empty()) return p;
    return (base / p).string();
  }
};

Config g_config;

template <typename T>
void fill(CLI::Option* opt, T& var, const std::string& section, const std::string& key) {
  if (opt->count() > 0) return;
  if (const json* v = g_config.lookup(section, key)) {
    try {
      var = v->get<T>();
    } catch (const json::exception& e) {
      throw Error("config key '" + key + "': " + e.what());
    }
  }
}

void fill_path(CLI::Option* opt, std::string& var, const std::string& section, const std::string& key) {
  if (opt->count() > 0) return;
  if (const json* v = g_config.lookup(section, key)) {
    if (!v->is_string()) throw Error("config key '" + key + "' must be a path string");
    var = g_config.path(v->get<std::string>());
  }
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw Error(flag + " is required");
}

coco::Dataset load_dataset(const std::string& path) {
  coco::Dataset ds = coco::parse_annotations(read_text_file(path));
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
  return ds;
}

coco::InstancePolicy parse_policy(const std::string& text) {
  if (text == "union") return coco::InstancePolicy::kUnion;
  if (text == "largest") return coco::InstancePolicy::kLargest;
  throw Error("unknown instance policy '" + text + "' (expected union|largest)");
}

PatchGrid load_grid(const std::string& dir) {
  LoadedManifest m = load_manifest(dir);
  return grid_from_tensor(m.get(kAttributionMap));
}

std::string slug(std::string label) {
  for (auto& c : label) {
    if (c == ' ') c = '_';
  }
  return label;
}

// Splits "NAME=VALUE".
std::pair<std::string, std::string> split_assignment(const std::string& text, const std::string& flag) {
  auto pos = text.find('=');
  if (pos == std::string::npos || pos == 0) throw Error(flag + " expects NAME=PATH, got '" + text + "'");
  return {text.substr(0, pos), text.substr(pos + 1)};
}

double parse_theta(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw Error("invalid cutoff value '" + text + "'");
  return v;
}

// attribute ------------------------------------------------------------------

struct AttributeArgs {
  std::string manifest, kind = "clip", normalize = "pre", layers, out;
};

void run_attribute(const AttributeArgs& a) {
  require(a.manifest, "--manifest");
  require(a.out, "--out");
  LoadedManifest m = load_manifest(a.manifest);
  Metadata meta;
  auto src = m.manifest.metadata.find("source_model");
  meta["source_model"] = src->second;
  meta["kind"] = a.kind;
  std::optional<PatchGrid> grid;
  if (a.kind == "clip") {
    ClipExport exp = ClipExport::from_manifest(m);
    std::optional<std::vector<int>> subset;
    if (!a.layers.empty()) subset = parse_layer_list(a.layers);
    const NormalizeMode mode = parse_normalize_mode(a.normalize);
    grid = clip_map(exp, mode, subset);
    meta["layer_indices"] = format_layer_list(subset ? *subset : exp.layers);
    meta["normalize"] = to_string(mode);
  } else if (a.kind == "llava") {
    LlavaExport exp = LlavaExport::from_manifest(m);
    grid = llava_map(exp);
    meta["layer_indices"] = std::to_string(exp.layer);
  } else {
    throw Error("unknown --kind '" + a.kind + "' (expected clip|llava)");
  }
  meta["patch_side"] = std::to_string(grid->side());
  const Tensor t = grid_to_tensor(*grid);
  save_manifest(std::span(&t, 1), meta, a.out);
}

// compose --------------------------------------------------------------------

struct ComposeArgs {
  std::string map, mask, image, mode = "black", out;
  double cutoff = 0.0;
  bool renormalize = false;
};

void run_compose(const ComposeArgs& a) {
  require(a.image, "--image");
  require(a.out, "--out");
  if (a.map.empty() == a.mask.empty()) throw Error("exactly one of --map and --mask is required");
  const RgbImage image = read_png(a.image);
  ComposeOptions opt{parse_overlay_mode(a.mode), a.cutoff, a.renormalize};
  if (!a.map.empty()) {
    write_png(compose(image, load_grid(a.map), opt), a.out);
  } else {
    write_png(compose_mask(image, read_mask_png(a.mask), opt), a.out);
  }
}

// masks ----------------------------------------------------------------------

struct MasksArgs {
  std::string annotations, out, policy = "union";
  bool tensors = false;
};

void run_masks(const MasksArgs& a) {
  require(a.annotations, "--annotations");
  require(a.out, "--out");
  const coco::Dataset ds = load_dataset(a.annotations);
  const auto policy = parse_policy(a.policy);
  fs::create_directories(a.out);
  std::vector<json> index;
  for (const auto& [image_id, labels] : ds.labels) {
    for (const auto& label : labels) {
      const BinaryMask mask = coco::label_mask(ds, image_id, label, policy);
      const std::string stem = std::to_string(image_id) + "_" + slug(label);
      write_mask_png(mask, fs::path(a.out) / (stem + ".png"));
      json rec{{"image_id", image_id}, {"label", label}, {"mask", stem + ".png"},
               {"fraction", coco::mask_fraction(mask)}};
      if (a.tensors) {
        Tensor t{"segmentation.mask", {mask.height(), mask.width()}, {}};
        for (auto b : mask.bits()) t.values.push_back(b ? 1.0f : 0.0f);
        save_manifest(std::span(&t, 1), {{"source_model", "coco"}, {"layer_indices", ""}},
                      fs::path(a.out) / stem);
        rec["tensor"] = stem;
      }
      index.push_back(std::move(rec));
    }
  }
  write_jsonl(fs::path(a.out) / "index.jsonl", index);
}

// pope -----------------------------------------------------------------------

struct PopeGenArgs {
  std::string annotations, out;
  std::size_t k_absent = pope::kDefaultAbsentCount;
};

void run_pope_gen(const PopeGenArgs& a, std::uint64_t seed) {
  require(a.annotations, "--annotations");
  require(a.out, "--out");
  const auto questions = pope::generate_for_dataset(load_dataset(a.annotations), seed, a.k_absent);
  std::vector<json> records;
  for (const auto& q : questions) records.push_back(pope::to_json(q));
  write_jsonl(a.out, records);
}

struct PopeScoreArgs {
  std::string questions, answers, json_out;
};

void run_pope_score(const PopeScoreArgs& a) {
  require(a.questions, "--questions");
  require(a.answers, "--answers");
  const auto qs = pope::load_questions(a.questions);
  const auto as = pope::load_answers(a.answers);
  const auto m = pope::score(pope::link(qs, as));
  const json j = pope::to_json(m);
  if (!a.json_out.empty()) write_text_file(a.json_out, j.dump(2) + "\n");
  using report::format_value;
  std::cout << "Acc. " << format_value(m.accuracy) << "  Prec. " << format_value(m.precision) << "  Rec. "
            << format_value(m.recall) << "  TNR " << format_value(m.tnr) << "  F1 " << format_value(m.f1)
            << "  Unsure " << format_value(m.unsure_rate) << "  (n=" << m.counts.total() << ")\n";
}

// align ----------------------------------------------------------------------

struct AlignArgs {
  std::string annotations, jobs, out, h_vlm = "clip", policy = "union";
  bool renormalize = false;
};

void run_align(const AlignArgs& a) {
  require(a.annotations, "--annotations");
  require(a.jobs, "--jobs");
  require(a.out, "--out");
  const coco::Dataset ds = load_dataset(a.annotations);
  const auto policy = parse_policy(a.policy);
  const fs::path jobs_dir = fs::path(a.jobs).parent_path();
  std::vector<json> records;
  for (const auto& job : read_jsonl(a.jobs)) {
    AlignmentRecord rec;
    std::string map;
    try {
      rec.image_id = job.at("image_id").get<std::int64_t>();
      rec.label = job.at("label").get<std::string>();
      map = job.at("map").get<std::string>();
      rec.h_vlm = job.contains("h_vlm") ? job["h_vlm"].get<std::string>() : a.h_vlm;
    } catch (const json::exception& e) {
      throw Error(std::string("malformed alignment job: ") + e.what());
    }
    if (fs::path(map).is_relative()) map = (jobs_dir / map).string();
    auto img = ds.images.find(rec.image_id);
    if (img == ds.images.end()) throw Error("alignment job: no image record " + std::to_string(rec.image_id));
    const Heatmap h = attention_heatmap(load_grid(map), img->second.size.height, img->second.size.width,
                                        a.renormalize);
    rec.score = align(h, coco::label_mask(ds, rec.image_id, rec.label, policy));
    records.push_back(to_json(rec));
  }
  write_jsonl(a.out, records);
}

// report ---------------------------------------------------------------------

struct ReportArgs {
  std::string questions, baseline, baseline_name = "w/o prpt.", seg_answers, alignment, h_vlm, annotations;
  std::vector<std::string> variants;
  double iou_threshold = report::kDefaultIouThreshold;
  std::vector<double> bin_edges = report::kDefaultBinEdges;
  std::string json_out, text_out;
};

// Variants from the config: [{"name", "answers"}] or {"name": "path"}.
std::vector<report::NamedAnswers> config_variants(const std::string& section) {
  std::vector<report::NamedAnswers> out;
  const json* v = nullptr;
  if (g_config.root.contains(section) && g_config.root[section].is_object()) {
    const json& s = g_config.root[section];
    if (s.contains("variants")) v = &s["variants"];
  }
  if (!v && g_config.root.contains("variants")) v = &g_config.root["variants"];
  if (!v) return out;
  if (v->is_array()) {
    for (const auto& e : *v) out.push_back({e.at("name").get<std::string>(), pope::load_answers(g_config.path(e.at("answers").get<std::string>()))});
  } else if (v->is_object()) {
    for (const auto& [name, path] : v->items()) out.push_back({name, pope::load_answers(g_config.path(path.get<std::string>()))});
  } else {
    throw Error("config 'variants' must be an array or an object");
  }
  return out;
}

void emit_report(const report::Report& rep, const std::string& json_out, const std::string& text_out) {
  if (!json_out.empty()) write_text_file(json_out, rep.json.dump(2) + "\n");
  if (!text_out.empty()) {
    write_text_file(text_out, rep.text);
  } else {
    std::cout << rep.text;
  }
}

void run_report(const ReportArgs& a, bool variants_given) {
  require(a.questions, "--questions");
  require(a.baseline, "--baseline");
  report::ReportInputs in;
  in.questions = pope::load_questions(a.questions);
  in.baseline = {a.baseline_name, pope::load_answers(a.baseline)};
  if (variants_given) {
    for (const auto& v : a.variants) {
      auto [name, path] = split_assignment(v, "--variant");
      in.variants.push_back({name, pope::load_answers(path)});
    }
  } else {
    in.variants = config_variants("report");
  }
  if (!a.seg_answers.empty()) in.seg_answers = pope::load_answers(a.seg_answers);
  if (!a.alignment.empty()) {
    std::vector<AlignmentRecord> recs;
    for (const auto& j : read_jsonl(a.alignment)) recs.push_back(alignment_from_json(j));
    in.alignment = std::move(recs);
  }
  in.h_vlm = a.h_vlm;
  in.iou_threshold = a.iou_threshold;
  if (!a.annotations.empty()) in.dataset = load_dataset(a.annotations);
  in.bin_edges = a.bin_edges;
  emit_report(report::build_report(in), a.json_out, a.text_out);
}

// sweep ----------------------------------------------------------------------

struct SweepArgs {
  std::string questions, baseline;
  std::vector<std::string> thetas_answers;
  std::vector<double> thetas = report::kDefaultThetas;
  std::string image, map, mask, mode = "black", out_dir;
  bool renormalize = false;
  std::string json_out, text_out;
};

std::string theta_name(double theta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "theta_%.2f.png", theta);
  return buf;
}

void run_sweep(SweepArgs a) {
  const bool have_answers = !a.baseline.empty();
  const bool have_images = !a.image.empty();
  if (!have_answers && !have_images) throw Error("sweep needs --baseline (recorded answers) or --image (prompted images)");

  if (have_images) {
    require(a.out_dir, "--out-dir");
    if (a.map.empty() == a.mask.empty()) throw Error("exactly one of --map and --mask is required with --image");
    const RgbImage image = read_png(a.image);
    const OverlayMode mode = parse_overlay_mode(a.mode);
    const Heatmap base = !a.map.empty()
                             ? attention_heatmap(load_grid(a.map), image.height(), image.width(), a.renormalize)
                             : mask_to_heatmap(read_mask_png(a.mask));
    fs::create_directories(a.out_dir);
    for (double theta : a.thetas) {
      write_png(overlay(image, min_cutoff(base, theta), mode), fs::path(a.out_dir) / theta_name(theta));
    }
  }

  if (have_answers) {
    require(a.questions, "--questions");
    const auto qs = pope::load_questions(a.questions);
    const auto baseline = pope::score(pope::link(qs, pope::load_answers(a.baseline)));
    std::map<double, std::vector<pope::Judgement>> by_theta;
    for (const auto& t : a.thetas_answers) {
      auto [theta, path] = split_assignment(t, "--theta");
      by_theta[parse_theta(theta)] = pope::link(qs, pope::load_answers(path));
    }
    auto sweep = report::cutoff_sweep(baseline, by_theta, a.thetas);
    report::Report rep;
    rep.text = report::render_text(sweep.table);
    json rows = json::array();
    for (const auto& r : sweep.rows) rows.push_back({{"theta", r.theta}, {"metrics", pope::to_json(r.metrics)}});
    rep.json = {{"baseline", pope::to_json(baseline)}, {"rows", rows}, {"table", report::to_json(sweep.table)}};
    emit_report(rep, a.json_out, a.text_out);
  }
}

void load_config(const std::string& path) {
  if (path.empty()) return;
  try {
    g_config.root = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(path + ": malformed config JSON: " + e.what());
  }
  if (!g_config.root.is_object()) throw Error(path + ": config must be a JSON object");
  g_config.base = fs::path(path).parent_path();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention prompting on images and object-hallucination evaluation"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::string config_path;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for question sampling");
  app.add_option("--config", config_path, "JSON file supplying option defaults");
  app.set_help_all_flag("--help-all");

  AttributeArgs attr;
  auto* attribute = app.add_subcommand("attribute", "Compute an attribution map from a tensor manifest");
  auto* attr_manifest = attribute->add_option("--manifest", attr.manifest, "Export manifest directory");
  auto* attr_kind = attribute->add_option("--kind", attr.kind, "clip | llava");
  auto* attr_norm = attribute->add_option("--normalize", attr.normalize, "pre | post | both (clip)");
  auto* attr_layers = attribute->add_option("--layers", attr.layers, "Comma-separated subset of exported layers");
  auto* attr_out = attribute->add_option("--out", attr.out, "Output manifest directory");

  ComposeArgs comp;
  auto* compose_cmd = app.add_subcommand("compose", "Overlay an attribution map or mask on an image");
  auto* comp_map = compose_cmd->add_option("--map", comp.map, "Attribution map manifest directory");
  auto* comp_mask = compose_cmd->add_option("--mask", comp.mask, "Segmentation mask PNG");
  auto* comp_image = compose_cmd->add_option("--image", comp.image, "Input PNG");
  auto* comp_mode = compose_cmd->add_option("--mode", comp.mode, "black | gray");
  auto* comp_cutoff = compose_cmd->add_option("--cutoff", comp.cutoff, "Minimum heatmap value")->check(CLI::Range(0.0, 1.0));
  auto* comp_renorm = compose_cmd->add_flag("--renormalize", comp.renormalize, "Normalize after smoothing");
  auto* comp_out = compose_cmd->add_option("--out", comp.out, "Output PNG");

  MasksArgs masks;
  auto* masks_cmd = app.add_subcommand("masks", "Export ground-truth masks per (image, label)");
  auto* masks_ann = masks_cmd->add_option("--annotations", masks.annotations, "COCO instances JSON");
  auto* masks_out = masks_cmd->add_option("--out", masks.out, "Output directory");
  auto* masks_policy = masks_cmd->add_option("--policy", masks.policy, "union | largest");
  auto* masks_tensors = masks_cmd->add_flag("--tensors", masks.tensors, "Also write 0/1 tensor manifests");

  auto* pope_cmd = app.add_subcommand("pope", "POPE question generation and scoring");
  pope_cmd->require_subcommand(1);
  PopeGenArgs gen;
  auto* gen_cmd = pope_cmd->add_subcommand("gen", "Generate presence questions");
  auto* gen_ann = gen_cmd->add_option("--annotations", gen.annotations, "COCO instances JSON");
  auto* gen_k = gen_cmd->add_option("--k-absent", gen.k_absent, "Absent questions per image");
  auto* gen_out = gen_cmd->add_option("--out", gen.out, "Output JSON-lines");
  auto* gen_seed = gen_cmd->add_option("--seed", seed, "Seed for question sampling");
  PopeScoreArgs sc;
  auto* score_cmd = pope_cmd->add_subcommand("score", "Score answers against questions");
  auto* sc_q = score_cmd->add_option("--questions", sc.questions, "Questions JSON-lines");
  auto* sc_a = score_cmd->add_option("--answers", sc.answers, "Answers JSON-lines");
  auto* sc_json = score_cmd->add_option("--json", sc.json_out, "Write metrics JSON");

  AlignArgs al;
  auto* align_cmd = app.add_subcommand("align", "Score attention heatmaps against ground-truth masks");
  auto* al_ann = align_cmd->add_option("--annotations", al.annotations, "COCO instances JSON");
  auto* al_jobs = align_cmd->add_option("--jobs", al.jobs, "JSON-lines of {image_id, label, map}");
  auto* al_out = align_cmd->add_option("--out", al.out, "Output JSON-lines");
  auto* al_hvlm = align_cmd->add_option("--h-vlm", al.h_vlm, "Heatmap model tag");
  auto* al_policy = align_cmd->add_option("--policy", al.policy, "union | largest");
  auto* al_renorm = align_cmd->add_flag("--renormalize", al.renormalize, "Normalize after smoothing");

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand("report", "Aggregate POPE answers and alignment scores");
  auto* rp_q = report_cmd->add_option("--questions", rp.questions, "Questions JSON-lines");
  auto* rp_b = report_cmd->add_option("--baseline", rp.baseline, "Unprompted answers JSON-lines");
  auto* rp_bn = report_cmd->add_option("--baseline-name", rp.baseline_name, "Baseline row name");
  auto* rp_v = report_cmd->add_option("--variant", rp.variants, "NAME=answers.jsonl (repeatable)");
  auto* rp_seg = report_cmd->add_option("--seg-answers", rp.seg_answers, "Segmentation-prompted answers");
  auto* rp_al = report_cmd->add_option("--alignment", rp.alignment, "Alignment scores JSON-lines");
  auto* rp_hvlm = report_cmd->add_option("--h-vlm", rp.h_vlm, "Filter alignment scores by model tag");
  auto* rp_iou = report_cmd->add_option("--iou-threshold", rp.iou_threshold, "IoU split threshold");
  auto* rp_ann = report_cmd->add_option("--annotations", rp.annotations, "COCO instances JSON for size bins");
  auto* rp_edges = report_cmd->add_option("--bin-edges", rp.bin_edges, "Size-fraction bin edges")->delimiter(',');
  auto* rp_json = report_cmd->add_option("--json", rp.json_out, "Write report JSON");
  auto* rp_text = report_cmd->add_option("--text", rp.text_out, "Write report text (default stdout)");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cutoff sweep over recorded answers or prompted images");
  auto* sw_q = sweep_cmd->add_option("--questions", sw.questions, "Questions JSON-lines");
  auto* sw_b = sweep_cmd->add_option("--baseline", sw.baseline, "Unprompted answers JSON-lines");
  auto* sw_t = sweep_cmd->add_option("--theta", sw.thetas_answers, "THETA=answers.jsonl (repeatable)");
  auto* sw_ts = sweep_cmd->add_option("--thetas", sw.thetas, "Cutoff values")->delimiter(',');
  auto* sw_img = sweep_cmd->add_option("--image", sw.image, "Input PNG for prompted-image output");
  auto* sw_map = sweep_cmd->add_option("--map", sw.map, "Attribution map manifest directory");
  auto* sw_mask = sweep_cmd->add_option("--mask", sw.mask, "Segmentation mask PNG");
  auto* sw_mode = sweep_cmd->add_option("--mode", sw.mode, "black | gray");
  auto* sw_renorm = sweep_cmd->add_flag("--renormalize", sw.renormalize, "Normalize after smoothing");
  auto* sw_out = sweep_cmd->add_option("--out-dir", sw.out_dir, "Directory for prompted images");
  auto* sw_json = sweep_cmd->add_option("--json", sw.json_out, "Write sweep JSON");
  auto* sw_text = sweep_cmd->add_option("--text", sw.text_out, "Write sweep text (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    load_config(config_path);
    if (gen_seed->count() == 0) fill(seed_opt, seed, "", "seed");

    if (attribute->parsed()) {
      const std::string s = "attribute";
      fill_path(attr_manifest, attr.manifest, s, "manifest");
      fill(attr_kind, attr.kind, s, "kind");
      fill(attr_norm, attr.normalize, s, "normalize");
      fill(attr_layers, attr.layers, s, "layers");
      fill_path(attr_out, attr.out, s, "out");
      run_attribute(attr);
    } else if (compose_cmd->parsed()) {
      const std::string s = "compose";
      fill_path(comp_map, comp.map, s, "map");
      fill_path(comp_mask, comp.mask, s, "mask");
      fill_path(comp_image, comp.image, s, "image");
      fill(comp_mode, comp.mode, s, "mode");
      fill(comp_cutoff, comp.cutoff, s, "cutoff");
      fill(comp_renorm, comp.renormalize, s, "renormalize");
      fill_path(comp_out, comp.out, s, "out");
      run_compose(comp);
    } else if (masks_cmd->parsed()) {
      const std::string s = "masks";
      fill_path(masks_ann, masks.annotations, s, "annotations");
      fill_path(masks_out, masks.out, s, "out");
      fill(masks_policy, masks.policy, s, "policy");
      fill(masks_tensors, masks.tensors, s, "tensors");
      run_masks(masks);
    } else if (gen_cmd->parsed()) {
      const std::string s = "pope";
      fill_path(gen_ann, gen.annotations, s, "annotations");
      fill(gen_k, gen.k_absent, s, "k_absent");
      fill_path(gen_out, gen.out, s, "out");
      run_pope_gen(gen, seed);
    } else if (score_cmd->parsed()) {
      const std::string s = "pope";
      fill_path(sc_q, sc.questions, s, "questions");
      fill_path(sc_a, sc.answers, s, "answers");
      fill_path(sc_json, sc.json_out, s, "json");
      run_pope_score(sc);
    } else if (align_cmd->parsed()) {
      const std::string s = "align";
      fill_path(al_ann, al.annotations, s, "annotations");
      fill_path(al_jobs, al.jobs, s, "jobs");
      fill_path(al_out, al.out, s, "out");
      fill(al_hvlm, al.h_vlm, s, "h_vlm");
      fill(al_policy, al.policy, s, "policy");
      fill(al_renorm, al.renormalize, s, "renormalize");
      run_align(al);
    } else if (report_cmd->parsed()) {
      const std::string s = "report";
      fill_path(rp_q, rp.questions, s, "questions");
      fill_path(rp_b, rp.baseline, s, "baseline");
      fill(rp_bn, rp.baseline_name, s, "baseline_name");
      fill_path(rp_seg, rp.seg_answers, s, "seg_answers");
      fill_path(rp_al, rp.alignment, s, "alignment");
      fill(rp_hvlm, rp.h_vlm, s, "h_vlm");
      fill(rp_iou, rp.iou_threshold, s, "iou_threshold");
      fill_path(rp_ann, rp.annotations, s, "annotations");
      fill(rp_edges, rp.bin_edges, s, "bin_edges");
      fill_path(rp_json, rp.json_out, s, "json");
      fill_path(rp_text, rp.text_out, s, "text");
      run_report(rp, rp_v->count() > 0);
    } else if (sweep_cmd->parsed()) {
      const std::string s = "sweep";
      fill_path(sw_q, sw.questions, s, "questions");
      fill_path(sw_b, sw.baseline, s, "baseline");
      fill(sw_ts, sw.thetas, s, "thetas");
      fill_path(sw_img, sw.image, s, "image");
      fill_path(sw_map, sw.map, s, "map");
      fill_path(sw_mask, sw.mask, s, "mask");
      fill(sw_mode, sw.mode, s, "mode");
      fill(sw_renorm, sw.renormalize, s, "renormalize");
      fill_path(sw_out, sw.out_dir, s, "out_dir");
      fill_path(sw_json, sw.json_out, s, "json");
      fill_path(sw_text, sw.text_out, s, "text");
      if (sw_t->count() == 0) {
        if (const json* answers = g_config.lookup(s, "answers")) {
          for (const auto& [theta, path] : answers->items()) {
            sw.thetas_answers.push_back(theta + "=" + g_config.path(path.get<std::string>()));
          }
        }
      }
      run_sweep(sw);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
