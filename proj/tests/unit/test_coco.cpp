// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/coco.hpp"

#include <algorithm>
#include <random>

#include "apiprompt/error.hpp"
#include "apiprompt/jsonl.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace apiprompt;
using namespace apiprompt::coco;

namespace {

std::string fixture_text() { return read_text_file(testutil::fixtures() / "coco" / "instances_fixture.json"); }

std::string tiny(const std::string& annotations, const std::string& images = R"([{"id": 1, "height": 4, "width": 4}])") {
  return R"({"images": )" + images + R"(, "categories": [{"id": 1, "name": "person"}, {"id": 18, "name": "dog"}],
            "annotations": )" + annotations + "}";
}

std::string square_annotation(int id, int category, double x0, double y0, double x1, double y1) {
  nlohmann::json a{{"id", id}, {"image_id", 1}, {"category_id", category}, {"iscrowd", 0}, {"area", 0},
                   {"segmentation", {{x0, y0, x1, y0, x1, y1, x0, y1}}}};
  return a.dump();
}

std::size_t count(const BinaryMask& m) { return m.popcount(); }

}  // namespace

TEST_CASE("vocabulary") {
  CHECK(vocabulary().size() == 80);
  CHECK(vocabulary().front().name == "person");
  CHECK(label_for_id(90) == "toothbrush");
  CHECK(!label_for_id(12).has_value());
  CHECK(label_index("dog").has_value());
  CHECK(!label_index("unicorn").has_value());
}

TEST_CASE("two annotations on one image give two objects and one label set") {
  auto ds = parse_annotations(tiny("[" + square_annotation(1, 1, 0, 0, 2, 2) + "," + square_annotation(2, 1, 2, 2, 4, 4) + "]"));
  CHECK(ds.objects.size() == 2);
  CHECK(ds.labels.size() == 1);
  CHECK(ds.labels.at(1) == std::vector<std::string>{"person"});
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_annotations("{not json"), Error);
  CHECK_THROWS_WITH_AS(parse_annotations(tiny("[" + square_annotation(1, 777, 0, 0, 1, 1) + "]")),
                       doctest::Contains("777"), Error);
  auto orphan = square_annotation(1, 1, 0, 0, 1, 1);
  orphan.replace(orphan.find("\"image_id\":1"), 12, "\"image_id\":9");
  CHECK_THROWS_WITH_AS(parse_annotations(tiny("[" + orphan + "]")), doctest::Contains("9"), Error);
  auto degenerate = R"({"id": 3, "image_id": 1, "category_id": 1, "segmentation": [[0, 0, 1, 1]], "area": 0})";
  CHECK_THROWS_AS(rasterize(parse_annotations(tiny(std::string("[") + degenerate + "]")).objects.at(0)), Error);
}

TEST_CASE("fixture object count equals the raw annotation count") {
  const auto text = fixture_text();
  auto raw = nlohmann::json::parse(text);
  std::size_t walked = 0;
  for (const auto& a : raw["annotations"]) walked += a.contains("segmentation") ? 1 : 0;
  auto ds = parse_annotations(text);
  CHECK(walked == raw["annotations"].size());
  CHECK(ds.objects.size() == walked);
  CHECK(ds.images.size() == raw["images"].size());
  for (const auto& [id, labels] : ds.labels) {
    CHECK(std::is_sorted(labels.begin(), labels.end(),
                         [](const auto& a, const auto& b) { return *label_index(a) < *label_index(b); }));
    CHECK(std::adjacent_find(labels.begin(), labels.end()) == labels.end());
  }
}

TEST_CASE("compressed RLE is skipped with a warning") {
  auto a = R"({"id": 5, "image_id": 1, "category_id": 1, "iscrowd": 1, "area": 4,
              "segmentation": {"size": [4, 4], "counts": "04L4"}})";
  auto ds = parse_annotations(tiny(std::string("[") + a + "]"));
  CHECK(ds.objects.empty());
  CHECK(ds.warnings.size() == 1);
}

TEST_CASE("decode_rle") {
  auto ref = nlohmann::json::parse(read_text_file(testutil::fixtures() / "coco" / "rle_reference.json"));
  auto counts = ref["counts"].get<std::vector<std::uint32_t>>();
  auto m = decode_rle(counts, {2, 2});
  // Column-major order: (0,0), (1,0), (0,1), (1,1).
  std::vector<int> col_major{m(0, 0), m(1, 0), m(0, 1), m(1, 1)};
  CHECK(col_major == ref["column_major"].get<std::vector<int>>());
  CHECK(count(decode_rle(std::vector<std::uint32_t>{12}, {3, 4})) == 0);
  CHECK_THROWS_AS(decode_rle(std::vector<std::uint32_t>{1, 2}, {2, 2}), Error);
  CHECK_THROWS_AS(decode_rle(std::vector<std::uint32_t>{3, 3}, {2, 2}), Error);
  CHECK(encode_rle(BinaryMask(2, 2, true)).counts == std::vector<std::uint32_t>{0, 4});
}

TEST_CASE("property: encode then decode is the identity on random masks") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = dim(rng), w = dim(rng);
    auto m = testutil::random_mask(rng, h, w, testutil::uniform(rng, 1)[0]);
    auto rle = encode_rle(m);
    CHECK(rle.size == ImageSize{h, w});
    CHECK(decode_rle(rle.counts, rle.size) == m);
  }
}

TEST_CASE("rasterize_polygon areas") {
  for (std::size_t k : {1, 2, 5, 9}) {
    const double x0 = 3, y0 = 2;
    Polygons sq{{x0, y0, x0 + k, y0, x0 + k, y0 + k, x0, y0 + k}};
    CHECK(count(rasterize_polygon(sq, {16, 16})) == k * k);
  }
  Polygons whole{{0, 0, 10, 0, 10, 7, 0, 7}};
  CHECK(rasterize_polygon(whole, {7, 10}) == BinaryMask(7, 10, true));

  Polygons t1{{1, 1, 9, 1, 1, 9}}, t2{{12, 12, 19, 12, 19, 19}};
  Polygons both{t1[0], t2[0]};
  CHECK(count(rasterize_polygon(both, {20, 20})) == count(rasterize_polygon(t1, {20, 20})) + count(rasterize_polygon(t2, {20, 20})));

  CHECK_THROWS_AS(rasterize_polygon({{0, 0, 1, 1}}, {4, 4}), Error);
  CHECK_THROWS_AS(rasterize_polygon({{0, 0, 1, 1, 2}}, {4, 4}), Error);
}

TEST_CASE("rasterized areas agree with declared areas within 2%") {
  auto ds = parse_annotations(fixture_text());
  REQUIRE(ds.objects.size() == 20);
  for (const auto& obj : ds.objects) {
    auto m = rasterize(obj);
    CHECK(m.height() == obj.image_size.height);
    CHECK(m.width() == obj.image_size.width);
    const double area = static_cast<double>(m.popcount());
    INFO("annotation " << obj.annotation_id);
    CHECK(std::abs(area - obj.declared_area) <= 0.02 * obj.declared_area);
  }
}

TEST_CASE("RLE round trip on the fixture corpus") {
  auto ds = parse_annotations(fixture_text());
  for (const auto& obj : ds.objects) {
    auto m = rasterize(obj);
    auto rle = encode_rle(m);
    CHECK(decode_rle(rle.counts, rle.size) == m);
    if (const auto* r = std::get_if<Rle>(&obj.segmentation)) CHECK(rle.counts == r->counts);
  }
}

TEST_CASE("object size fraction") {
  CHECK(mask_fraction(BinaryMask(4, 6, true)) == 1.0);
  CHECK(mask_fraction(BinaryMask(4, 6, false)) == 0.0);
  auto ds = parse_annotations(tiny("[" + square_annotation(1, 1, 0, 0, 4, 2) + "]"));
  CHECK(object_size_fraction(ds.objects.at(0)) == 0.5);
}

TEST_CASE("label masks union instances in any order") {
  const auto a = square_annotation(1, 18, 0, 0, 2, 2);
  const auto b = square_annotation(2, 18, 1, 1, 4, 3);
  const auto c = square_annotation(3, 1, 0, 3, 4, 4);
  auto ab = parse_annotations(tiny("[" + a + "," + b + "," + c + "]"));
  auto ba = parse_annotations(tiny("[" + c + "," + b + "," + a + "]"));
  auto m = label_mask(ab, 1, "dog");
  CHECK(m == label_mask(ba, 1, "dog"));
  CHECK(m.popcount() == 4 + 6 - 1);
  CHECK(label_mask(ab, 1, "dog", InstancePolicy::kLargest).popcount() == 6);
  CHECK(label_mask(ab, 1, "cat").popcount() == 0);
  CHECK(ab.labels.at(1) == std::vector<std::string>{"person", "dog"});
}
