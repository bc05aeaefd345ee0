#include <cmath>
#include <filesystem>
#include <fstream>
#include <queue>

#include "doctest.h"
#include "glsp/rng.hpp"
#include "glsp/synthgen.hpp"

using namespace glsp;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("glsp_test_synthgen_" + name);
}

bool inside(const std::vector<Point>& poly, Point p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

GeneratorConfig single_room() {
  GeneratorConfig c;
  c.min_rooms = c.max_rooms = 1;
  c.window_probability = 0.0;
  c.extra_door_probability = 0.0;
  c.entrance_door = false;
  c.inclined_wall_probability = 0.0;
  return c;
}

}  // namespace

TEST_CASE("single room without openings is the margin rectangle") {
  const GeneratorConfig cfg = single_room();
  const auto plan = generate_plan(7, cfg);
  REQUIRE(plan.lines.size() == 4);
  for (const auto& l : plan.lines) {
    CHECK(l.cls == SegmentClass::wall);
    for (Point p : {l.segment.a(), l.segment.b()}) {
      const bool on_x = p.x == cfg.margin || p.x == cfg.canvas.width - 1 - cfg.margin;
      const bool on_y = p.y == cfg.margin || p.y == cfg.canvas.height - 1 - cfg.margin;
      CHECK((on_x && on_y));
    }
  }
  REQUIRE(plan.rooms.size() == 1);
}

TEST_CASE("generation is deterministic in seed and config") {
  const GeneratorConfig cfg;
  for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
    CHECK(annotation_to_string(generate_plan(seed, cfg)) == annotation_to_string(generate_plan(seed, cfg)));
  }
  CHECK(annotation_to_string(generate_plan(1, cfg)) != annotation_to_string(generate_plan(2, cfg)));
}

TEST_CASE("config validation rejects rooms that cannot fit") {
  GeneratorConfig cfg;
  cfg.min_room_size = 400;
  CHECK_THROWS_AS(generate_plan(1, cfg), std::invalid_argument);
}

TEST_CASE("generated plans are valid and structured") {
  const GeneratorConfig cfg;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto plan = generate_plan(seed, cfg);
    CHECK_NOTHROW(plan.validate());
    CHECK(plan.scale > 0.0);
    std::vector<const AnnotatedLine*> walls;
    for (const auto& l : plan.lines) {
      if (l.cls == SegmentClass::wall) walls.push_back(&l);
    }
    for (const auto& l : plan.lines) {
      CHECK(plan.canvas.contains(l.segment.a()));
      CHECK(plan.canvas.contains(l.segment.b()));
      if (l.cls == SegmentClass::wall) continue;
      // Openings continue a wall line: some wall is collinear and shares an
      // endpoint with the opening.
      bool collinear_wall = false;
      for (const auto* w : walls) {
        const Point d = l.segment.b() - l.segment.a();
        const bool on_line = std::abs(cross(d, w->segment.a() - l.segment.a())) < 1e-6 &&
                             std::abs(cross(d, w->segment.b() - l.segment.a())) < 1e-6;
        const bool touches = w->segment.a() == l.segment.a() || w->segment.a() == l.segment.b() ||
                             w->segment.b() == l.segment.a() || w->segment.b() == l.segment.b();
        collinear_wall = collinear_wall || (on_line && touches);
      }
      CHECK_MESSAGE(collinear_wall, "seed ", seed);
    }
    for (const auto& room : plan.rooms) CHECK(std::abs(signed_area(room.contour)) > 0.0);
  }
}

TEST_CASE("room contours partition the plan interior") {
  const GeneratorConfig cfg;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto plan = generate_plan(seed, cfg);
    const int w = plan.canvas.width, h = plan.canvas.height;
    std::vector<int> cover(static_cast<std::size_t>(w) * h, 0);
    for (const auto& room : plan.rooms) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (inside(room.contour, {x + 0.5, y + 0.5})) ++cover[static_cast<std::size_t>(y) * w + x];
        }
      }
    }
    // Pixels not touching any line, reached from the canvas border, are
    // outside. Every other untouched pixel must be in exactly one room.
    std::vector<bool> blocked(cover.size(), false);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (const auto& l : plan.lines) {
          if (point_segment_distance({x + 0.5, y + 0.5}, l.segment) <= 1.0) {
            blocked[static_cast<std::size_t>(y) * w + x] = true;
            break;
          }
        }
      }
    }
    std::vector<bool> outside(cover.size(), false);
    std::queue<std::pair<int, int>> q;
    for (int x = 0; x < w; ++x) q.push({x, 0});
    while (!q.empty()) {
      auto [x, y] = q.front();
      q.pop();
      if (x < 0 || y < 0 || x >= w || y >= h) continue;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (outside[i] || blocked[i]) continue;
      outside[i] = true;
      q.push({x + 1, y});
      q.push({x - 1, y});
      q.push({x, y + 1});
      q.push({x, y - 1});
    }
    int bad = 0;
    for (std::size_t i = 0; i < cover.size(); ++i) {
      if (cover[i] > 1) ++bad;
      if (!blocked[i] && !outside[i] && cover[i] != 1) ++bad;
      if (outside[i] && cover[i] != 0) ++bad;
    }
    CHECK_MESSAGE(bad == 0, "seed ", seed);
  }
}

TEST_CASE("class counts follow walls > windows > doors loosely") {
  const GeneratorConfig cfg;
  double walls = 0, doors = 0, windows = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto plan = generate_plan(seed, cfg);
    walls += plan.count(SegmentClass::wall);
    doors += plan.count(SegmentClass::door);
    windows += plan.count(SegmentClass::window);
  }
  auto within3 = [](double ratio, double target) { return ratio >= target / 3.0 && ratio <= target * 3.0; };
  CHECK(within3(walls / doors, 13.3 / 1.8));
  CHECK(within3(walls / windows, 13.3 / 2.2));
  CHECK(within3(windows / doors, 2.2 / 1.8));
}

TEST_CASE("rasterize empty plan is background") {
  FloorPlanAnnotation plan;
  StyleConfig style;
  const auto fm = rasterize(plan, style);
  CHECK(fm.channels() == 3);
  for (float v : fm.data()) CHECK(v == 1.0f);
}

TEST_CASE("rasterize single wall") {
  FloorPlanAnnotation plan;
  plan.lines.push_back({Segment({40, 50}, {200, 50}), 4.0, SegmentClass::wall});
  StyleConfig style;
  style.wall = {0, 0, 0};
  const auto fm = rasterize(plan, style);
  for (int x = 40; x <= 200; ++x) {
    for (int c = 0; c < 3; ++c) CHECK(fm.at(c, 50, x) < 0.5f);
  }
  for (int y = 0; y < fm.height(); ++y) {
    for (int x = 0; x < fm.width(); ++x) {
      if (point_segment_distance({double(x), double(y)}, plan.lines[0].segment) > 2.0) {
        CHECK(fm.at(0, y, x) == 1.0f);
      }
    }
  }
}

TEST_CASE("wall color changes values but not support") {
  const auto plan = generate_plan(3, GeneratorConfig{});
  StyleConfig a, b;
  b.wall = {0.3, 0.1, 0.0};
  const auto fa = rasterize(plan, a), fb = rasterize(plan, b);
  bool differs = false;
  for (int y = 0; y < fa.height(); ++y) {
    for (int x = 0; x < fa.width(); ++x) {
      bool bg_a = true, bg_b = true;
      for (int c = 0; c < 3; ++c) {
        bg_a = bg_a && fa.at(c, y, x) == 1.0f;
        bg_b = bg_b && fb.at(c, y, x) == 1.0f;
        differs = differs || fa.at(c, y, x) != fb.at(c, y, x);
      }
      CHECK(bg_a == bg_b);
    }
  }
  CHECK(differs);
}

TEST_CASE("ink stays near annotated segments") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto plan = generate_plan(seed, GeneratorConfig{});
    StyleConfig style = sample_style(seed);
    style.noise = 0.0;
    const auto fm = rasterize(plan, style);
    int far = 0;
    for (int y = 0; y < fm.height(); ++y) {
      for (int x = 0; x < fm.width(); ++x) {
        const bool bg = fm.at(0, y, x) == float(style.background.r) && fm.at(1, y, x) == float(style.background.g) &&
                        fm.at(2, y, x) == float(style.background.b);
        if (bg) continue;
        bool ok = false;
        for (const auto& l : plan.lines) {
          ok = ok || point_segment_distance({double(x), double(y)}, l.segment) <= l.thickness / 2 + 1;
        }
        far += ok ? 0 : 1;
      }
    }
    CHECK(far == 0);
  }
}

TEST_CASE("noise is bounded and seeded") {
  const auto plan = generate_plan(4, GeneratorConfig{});
  StyleConfig style;
  style.noise = 0.1;
  style.seed = 9;
  const auto a = rasterize(plan, style), b = rasterize(plan, style);
  CHECK(a == b);
  StyleConfig clean = style;
  clean.noise = 0.0;
  const auto c = rasterize(plan, clean);
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    CHECK(std::abs(a.data()[i] - c.data()[i]) <= 0.1f + 1e-6f);
    CHECK(a.data()[i] >= 0.0f);
    CHECK(a.data()[i] <= 1.0f);
  }
}

TEST_CASE("style validation") {
  StyleConfig s;
  s.wall = s.background;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  StyleConfig n;
  n.noise = 2.0;
  CHECK_THROWS_AS(n.validate(), std::invalid_argument);
  for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK_NOTHROW(sample_style(seed).validate());
}

TEST_CASE("annotation round trip") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto plan = generate_plan(seed, GeneratorConfig{});
    CHECK(annotation_from_string(annotation_to_string(plan)) == plan);
    const auto path = temp_path("plan.json");
    save_annotation(path, plan);
    CHECK(load_annotation(path) == plan);
    std::filesystem::remove(path);
  }
}

TEST_CASE("hand written annotation") {
  const auto plan = annotation_from_string(
      R"({"scale": 50, "canvas": [100, 80], "lines": [{"a": [10, 20], "b": [60, 20], "thickness": 4, "class": "wall"}], "rooms": []})");
  REQUIRE(plan.lines.size() == 1);
  CHECK(plan.lines[0].segment == Segment({10, 20}, {60, 20}));
  CHECK(plan.lines[0].thickness == 4.0);
  CHECK(plan.canvas == Canvas{100, 80});
}

TEST_CASE("annotation errors are distinguished") {
  auto kind_of = [](const std::string& text) {
    try {
      annotation_from_string(text);
    } catch (const AnnotationError& e) {
      return std::make_pair(e.kind(), std::string(e.what()));
    }
    return std::make_pair(AnnotationError::Kind::io, std::string("no error"));
  };
  auto [k1, m1] = kind_of(
      R"({"scale": 50, "canvas": [100, 80], "lines": [{"a": [1, 2], "b": [6, 2], "thickness": 4, "class": "stair"}], "rooms": []})");
  CHECK(k1 == AnnotationError::Kind::unknown_class);
  CHECK(m1.find("stair") != std::string::npos);
  auto [k2, m2] = kind_of(
      R"({"scale": 50, "canvas": [100, 80], "lines": [{"a": [1, 2], "b": [600, 2], "thickness": 4, "class": "wall"}], "rooms": []})");
  CHECK(k2 == AnnotationError::Kind::out_of_canvas);
  auto [k3, m3] = kind_of("{not json");
  CHECK(k3 == AnnotationError::Kind::malformed);
  CHECK_THROWS_AS(load_annotation(temp_path("does_not_exist.json")), AnnotationError);
}

TEST_CASE("feature map round trip") {
  const auto plan = generate_plan(2, GeneratorConfig{});
  StyleConfig style = sample_style(2);
  const auto fm = rasterize(plan, style);
  const auto path = temp_path("plan.rast");
  save_feature_map(path, fm);
  CHECK(load_feature_map(path) == fm);
  CHECK_THROWS(load_feature_map(path, kHeatmapMagic));
  std::filesystem::remove(path);
}
