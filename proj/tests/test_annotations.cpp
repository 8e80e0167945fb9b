#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "foi/annotations.hpp"
#include "oracles.hpp"

namespace foi {
namespace {

std::string doc(const std::string& list, int w = 1000, int h = 800) {
  return R"({"slide_id": "s1", "microns_per_pixel": 0.25, "width": )" + std::to_string(w) +
         R"(, "height": )" + std::to_string(h) + R"(, "annotations": [)" + list + "]}";
}

std::string item(int x, int y, const char* cls, bool e1, bool e2) {
  return R"({"x": )" + std::to_string(x) + R"(, "y": )" + std::to_string(y) + R"(, "class": ")" + cls +
         R"(", "expert1": )" + (e1 ? "true" : "false") + R"(, "expert2": )" + (e2 ? "true" : "false") + "}";
}

TEST(LoadAnnotations, EmptyList) {
  const auto set = parse_annotations(doc(""));
  EXPECT_EQ(set.slide_id, "s1");
  EXPECT_DOUBLE_EQ(set.microns_per_pixel, 0.25);
  EXPECT_EQ(set.width, 1000);
  EXPECT_TRUE(set.annotations.empty());
}

TEST(LoadAnnotations, OneMitosis) {
  const auto set = parse_annotations(doc(item(100, 200, "mitosis", true, true)));
  ASSERT_EQ(set.annotations.size(), 1u);
  EXPECT_EQ(set.annotations[0], (Annotation{100, 200, CellClass::mitosis, true, true}));
}

TEST(LoadAnnotations, BoundaryIsExclusive) {
  EXPECT_NO_THROW(parse_annotations(doc(item(999, 799, "other", false, false))));
  EXPECT_THROW(parse_annotations(doc(item(1000, 10, "mitosis", true, true))), ValidationError);
  EXPECT_THROW(parse_annotations(doc(item(10, 800, "mitosis", true, true))), ValidationError);
  EXPECT_THROW(parse_annotations(doc(item(-1, 10, "mitosis", true, true))), ValidationError);
}

TEST(LoadAnnotations, LookalikeMarkedByBothExpertsIsRejected) {
  EXPECT_THROW(parse_annotations(doc(item(1, 1, "mitosis_like", true, true))), ValidationError);
  EXPECT_NO_THROW(parse_annotations(doc(item(1, 1, "mitosis_like", true, false))));
}

TEST(LoadAnnotations, SchemaErrorsNameTheField) {
  auto message_of = [](const std::string& text) {
    try {
      parse_annotations(text, "a.json");
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("<no error>");
  };
  EXPECT_NE(message_of(doc(R"({"x": 1, "y": 2, "class": "mitosis", "expert1": true})")).find("annotations[0].expert2"),
            std::string::npos);
  EXPECT_NE(message_of(doc(item(1, 2, "blob", true, true))).find("annotations[0].class"), std::string::npos);
  EXPECT_NE(message_of(doc(R"({"x": 1.5, "y": 2, "class": "mitosis", "expert1": true, "expert2": true})"))
                .find("annotations[0].x"),
            std::string::npos);
  EXPECT_NE(message_of(doc(R"({"x": 1, "y": 2, "z": 0, "class": "mitosis", "expert1": true, "expert2": true})"))
                .find("annotations[0].z"),
            std::string::npos);
  // Syntax errors carry the line number.
  EXPECT_NE(message_of("{\n\"slide_id\": \"x\",\n oops}").find("a.json:3"), std::string::npos);
}

TEST(LoadAnnotations, FileRoundTripAndMissingFile) {
  AnnotationSet set;
  set.slide_id = "rt";
  set.microns_per_pixel = 1.0;
  set.width = 50;
  set.height = 40;
  set.annotations = {{1, 2, CellClass::mitosis, true, true},
                     {3, 4, CellClass::granulocyte, false, false},
                     {49, 39, CellClass::mitosis_like, false, true}};
  const auto path = std::filesystem::temp_directory_path() / ("foi_ann_" + std::to_string(::getpid()) + ".json");
  save_annotations(path, set);
  const auto back = load_annotations(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.slide_id, set.slide_id);
  EXPECT_EQ(back.annotations, set.annotations);
  EXPECT_THROW(load_annotations(path), MissingInputError);
}

TEST(Consensus, Rules) {
  AnnotationSet set;
  set.width = set.height = 100;
  set.annotations = {{1, 1, CellClass::mitosis, true, true},       {2, 2, CellClass::mitosis, true, false},
                     {3, 3, CellClass::mitosis, false, true},      {4, 4, CellClass::mitosis_like, true, false},
                     {5, 5, CellClass::granulocyte, true, true},   {6, 6, CellClass::mitosis, true, true}};
  EXPECT_EQ(consensus_mitoses(set), (std::vector<Point>{{1, 1}, {6, 6}}));
}

TEST(Consensus, IdempotentAndSubset) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> coord(0, 99), cls(0, 3), flag(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    AnnotationSet set;
    set.width = set.height = 100;
    for (int i = 0; i < 40; ++i) {
      set.annotations.push_back({coord(rng), coord(rng), static_cast<CellClass>(cls(rng)), flag(rng) == 1,
                                 flag(rng) == 1});
    }
    const auto once = consensus_mitoses(set);
    AnnotationSet again = set;
    again.annotations.clear();
    for (const auto& p : once) again.annotations.push_back({p.x, p.y, CellClass::mitosis, true, true});
    EXPECT_EQ(consensus_mitoses(again), once);
    EXPECT_LE(once.size(), set.annotations.size());
  }
}

TEST(EvalGridTest, CentersKeepWindowsInside) {
  const WindowDims win{300, 200};
  const auto g = make_eval_grid(1000, 700, win, 64);
  EXPECT_EQ(g.x0, 150);
  EXPECT_EQ(g.y0, 100);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) EXPECT_TRUE(fits(g.window_at(i, j), 1000, 700));
  EXPECT_FALSE(fits(g.window_at(g.nx, 0), 1000, 700));
  EXPECT_FALSE(fits(g.window_at(0, g.ny), 1000, 700));
}

TEST(GtMcMap, NoPointsIsZero) {
  const auto m = gt_mc_map({}, WindowDims{100, 80}, 400, 300, 1.0, 50);
  for (auto v : m.values()) EXPECT_EQ(v, 0);
}

TEST(GtMcMap, WholeSlideWindow) {
  const auto m = gt_mc_map({{17, 3}}, WindowDims{40, 30}, 40, 30, 1.0, 10);
  ASSERT_EQ(m.width(), 1);
  ASSERT_EQ(m.height(), 1);
  EXPECT_EQ(m(0, 0), 1);
}

TEST(GtMcMap, WindowLargerThanSlide) {
  EXPECT_THROW(gt_mc_map({}, WindowDims{41, 30}, 40, 30, 1.0, 10), GeometryError);
}

void expect_matches_naive(const std::vector<Point>& pts, const EvalGrid& g, const McMap& m) {
  ASSERT_EQ(m.width(), g.nx);
  ASSERT_EQ(m.height(), g.ny);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Rect r = g.window_at(i, j);
      ASSERT_EQ(m(i, j), oracle::naive_count(pts, r.x, r.y, r.w, r.h)) << i << "," << j;
    }
  }
}

TEST(GtMcMap, MatchesNaiveRecount) {
  std::mt19937_64 rng(23);
  const WindowDims win{1000, 750};
  for (int trial = 0; trial < 5; ++trial) {
    std::uniform_int_distribution<int> xs(0, 3999), ys(0, 2999);
    std::vector<Point> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({xs(rng), ys(rng)});
    // Points exactly on window edges probe the half-open membership.
    pts.push_back({500, 375});
    pts.push_back({1500, 1125});
    const auto g = make_eval_grid(4000, 3000, win, 100);
    expect_matches_naive(pts, g, gt_mc_map(pts, g, 1.0));
    expect_matches_naive(pts, g, gt_mc_map(pts, win, 4000, 3000, 1.0, 100));
  }
}

TEST(GtMcMap, ArbitraryGridMatchesNaive) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> c(0, 599);
  std::vector<Point> pts;
  for (int i = 0; i < 300; ++i) pts.push_back({c(rng), c(rng) / 2});
  EvalGrid g;
  g.x0 = 37;
  g.y0 = 20;
  g.stride = 7;
  g.nx = 60;
  g.ny = 30;
  g.window = {61, 33};
  expect_matches_naive(pts, g, gt_mc_map(pts, g, 1.0));
}

TEST(GtMcMap, TranslationEquivariant) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> c(0, 1999);
  std::vector<Point> pts, shifted;
  for (int i = 0; i < 200; ++i) pts.push_back({c(rng), c(rng)});
  const int k = 3, stride = 50;
  for (const auto& p : pts) shifted.push_back({p.x + k * stride, p.y + k * stride});
  const WindowDims win{400, 300};
  const auto a = gt_mc_map(pts, win, 2000, 2000, 1.0, stride);
  const auto b = gt_mc_map(shifted, win, 2000 + k * stride, 2000 + k * stride, 1.0, stride);
  for (int j = 0; j < a.height(); ++j)
    for (int i = 0; i < a.width(); ++i) ASSERT_EQ(a(i, j), b(i + k, j + k));
}

TEST(GtMcMap, NeverExceedsPointCount) {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> c(0, 999);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> pts;
    for (int i = 0; i < trial * 10; ++i) pts.push_back({c(rng), c(rng)});
    const auto m = gt_mc_map(pts, WindowDims{300, 225}, 1000, 1000, 1.0, 37);
    for (auto v : m.values()) {
      EXPECT_GE(v, 0);
      EXPECT_LE(v, static_cast<std::int32_t>(pts.size()));
    }
  }
}

}  // namespace
}  // namespace foi
