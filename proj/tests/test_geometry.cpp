#include <cmath>
#include <random>

#include "doctest.h"
#include "glsp/geometry.hpp"
#include "glsp/rng.hpp"

using namespace glsp;

namespace {

// Pixels of a grid `scale` times finer than the input coordinates, marked
// when the segment touches them; shared endpoints are masked by a disk of
// one input unit.
bool raster_intersect(const Segment& s1, const Segment& s2, int scale = 16) {
  auto dist = [](Point p, Point a, Point b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy);
    t = std::max(0.0, std::min(1.0, t));
    return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
  };
  std::vector<Point> shared;
  for (Point p : {s1.a(), s1.b()}) {
    if (p == s2.a() || p == s2.b()) shared.push_back(p);
  }
  const double lo_x = std::max(std::min(s1.a().x, s1.b().x), std::min(s2.a().x, s2.b().x)) - 1;
  const double hi_x = std::min(std::max(s1.a().x, s1.b().x), std::max(s2.a().x, s2.b().x)) + 1;
  const double lo_y = std::max(std::min(s1.a().y, s1.b().y), std::min(s2.a().y, s2.b().y)) - 1;
  const double hi_y = std::min(std::max(s1.a().y, s1.b().y), std::max(s2.a().y, s2.b().y)) + 1;
  const double half = std::sqrt(0.5) / scale;
  for (double y = std::floor(lo_y * scale) / scale; y <= hi_y; y += 1.0 / scale) {
    for (double x = std::floor(lo_x * scale) / scale; x <= hi_x; x += 1.0 / scale) {
      const Point p{x, y};
      bool masked = false;
      for (Point s : shared) masked = masked || distance(p, s) <= 1.0;
      if (masked) continue;
      if (dist(p, s1.a(), s1.b()) <= half && dist(p, s2.a(), s2.b()) <= half) return true;
    }
  }
  return false;
}

double segment_gap(const Segment& s1, const Segment& s2) {
  return std::min({point_segment_distance(s1.a(), s2), point_segment_distance(s1.b(), s2),
                   point_segment_distance(s2.a(), s1), point_segment_distance(s2.b(), s1)});
}

}  // namespace

TEST_CASE("segment rejects coincident endpoints") {
  CHECK_THROWS_AS(Segment({1, 1}, {1, 1}), std::invalid_argument);
  CHECK(Segment({0, 0}, {3, 4}).length() == doctest::Approx(5.0));
}

TEST_CASE("axis angle") {
  CHECK(axis_angle(Segment({0, 0}, {10, 0})) == doctest::Approx(0.0));
  CHECK(axis_angle(Segment({0, 0}, {0, -10})) == doctest::Approx(0.0));
  CHECK(axis_angle(Segment({0, 0}, {10, 10})) == doctest::Approx(45.0));
  CHECK(axis_angle(Segment({0, 0}, {-10, 10})) == doctest::Approx(45.0));
  CHECK(axis_angle(Segment({0, 0}, {10, std::tan(10.0 * M_PI / 180) * 10})) == doctest::Approx(10.0));
  Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    Segment s({uniform(rng, -50, 50), uniform(rng, -50, 50)}, {uniform(rng, -50, 50), uniform(rng, -50, 50)});
    const double a = axis_angle(s);
    CHECK(a >= 0.0);
    CHECK(a <= 45.0 + 1e-12);
    CHECK(axis_angle(s.reversed()) == doctest::Approx(a));
  }
}

TEST_CASE("junction angle") {
  const Segment h({0, 0}, {10, 0});
  CHECK(junction_angle(h, Segment({0, 0}, {0, 5}), {0, 0}) == doctest::Approx(90.0));
  CHECK(junction_angle(h, Segment({-4, 0}, {0, 0}), {0, 0}) == doctest::Approx(180.0));
  CHECK(junction_angle(h, Segment({20, 0}, {0, 0}), {0, 0}) == doctest::Approx(0.0));
  CHECK(junction_angle(h.reversed(), Segment({0, 0}, {5, 5}), {0, 0}) == doctest::Approx(45.0));
  CHECK_THROWS_AS(junction_angle(h, Segment({1, 1}, {2, 2}), {0, 0}), MissingSharedEndpoint);

  Rng rng(5);
  for (int k = 0; k < 300; ++k) {
    const Point c{uniform(rng, -10, 10), uniform(rng, -10, 10)};
    const Segment a(c, {uniform(rng, -10, 10), uniform(rng, -10, 10)});
    const Segment b({uniform(rng, -10, 10), uniform(rng, -10, 10)}, c);
    const double ab = junction_angle(a, b, c);
    CHECK(ab == doctest::Approx(junction_angle(b, a, c)));
    CHECK(ab >= 0.0);
    CHECK(ab <= 180.0);
  }
}

TEST_CASE("proper intersect cases") {
  const Segment h({0, 0}, {10, 0});
  CHECK(proper_intersect(h, Segment({5, -5}, {5, 5})));
  CHECK(proper_intersect(h, Segment({5, 0}, {5, 5})));        // T contact
  CHECK_FALSE(proper_intersect(h, Segment({10, 0}, {10, 5})));  // shared endpoint
  CHECK_FALSE(proper_intersect(h, Segment({10, 0}, {20, 0})));  // collinear, touching
  CHECK(proper_intersect(h, Segment({5, 0}, {20, 0})));         // collinear overlap
  CHECK(proper_intersect(h, Segment({0, 0}, {5, 0})));          // overlap from a shared end
  CHECK(proper_intersect(h, h.reversed()));
  CHECK_FALSE(proper_intersect(h, Segment({0, 1}, {10, 1})));
  CHECK_FALSE(proper_intersect(h, Segment({11, -1}, {11, 1})));
}

TEST_CASE("proper intersect agrees with a fine raster on unambiguous random pairs") {
  Rng rng(11);
  int checked = 0, positives = 0;
  while (checked < 1000) {
    auto pt = [&] { return Point{static_cast<double>(uniform_int(rng, 0, 30)), static_cast<double>(uniform_int(rng, 0, 30))}; };
    Point a = pt(), b = pt(), c = pt(), d = pt();
    // Bias toward shared endpoints and collinear configurations.
    const int mode = uniform_int(rng, 0, 3);
    if (mode == 1) c = a;
    if (mode == 2) c = {a.x + (b.x - a.x) * 0.5, a.y + (b.y - a.y) * 0.5};
    if (a == b || c == d) continue;
    const Segment s1(a, b), s2(c, d);
    const double gap = segment_gap(s1, s2);
    if (gap > 0.0 && gap < 0.2) continue;  // near miss: raster cannot tell
    const bool shares = a == c || a == d || b == c || b == d;
    if (shares) {
      const Point shared = (a == c || a == d) ? a : b;
      const double angle = junction_angle(s1, s2, shared);
      if (angle > 0.0 && angle < 8.0) continue;  // strokes overlap past the mask
    }
    const bool expected = raster_intersect(s1, s2);
    CHECK_MESSAGE(proper_intersect(s1, s2) == expected, "s1=(", a.x, ",", a.y, ")-(", b.x, ",", b.y, ") s2=(", c.x,
                  ",", c.y, ")-(", d.x, ",", d.y, ")");
    positives += expected ? 1 : 0;
    ++checked;
  }
  CHECK(positives > 100);
}

TEST_CASE("proper intersect is symmetric and orientation free") {
  Rng rng(13);
  for (int k = 0; k < 2000; ++k) {
    auto pt = [&] { return Point{static_cast<double>(uniform_int(rng, 0, 8)), static_cast<double>(uniform_int(rng, 0, 8))}; };
    const Point a = pt(), b = pt(), c = pt(), d = pt();
    if (a == b || c == d) continue;
    const Segment s1(a, b), s2(c, d);
    const bool r = proper_intersect(s1, s2);
    CHECK(proper_intersect(s2, s1) == r);
    CHECK(proper_intersect(s1.reversed(), s2) == r);
    CHECK(proper_intersect(s1, s2.reversed()) == r);
  }
}

TEST_CASE("crossing point") {
  auto p = crossing_point(Segment({0, 0}, {10, 10}), Segment({0, 10}, {10, 0}));
  REQUIRE(p);
  CHECK(p->x == doctest::Approx(5.0));
  CHECK(p->y == doctest::Approx(5.0));
  CHECK_FALSE(crossing_point(Segment({0, 0}, {10, 0}), Segment({0, 1}, {10, 1})));
  CHECK_FALSE(crossing_point(Segment({0, 0}, {1, 1}), Segment({0, 10}, {10, 0})));
}

TEST_CASE("convex hull against brute force") {
  CHECK(convex_hull({}).empty());
  CHECK(convex_hull({{1, 1}}).size() == 1);
  const auto collinear = convex_hull({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  REQUIRE(collinear.size() == 2);
  CHECK(collinear[0] == Point{0, 0});
  CHECK(collinear[1] == Point{3, 3});

  const auto square = convex_hull({{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}, {1, 0}});
  REQUIRE(square.size() == 4);
  CHECK(square[0] == Point{0, 0});
  CHECK(signed_area(square) == doctest::Approx(4.0));

  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point> pts;
    const int n = uniform_int(rng, 3, 25);
    for (int k = 0; k < n; ++k) pts.push_back({static_cast<double>(uniform_int(rng, 0, 12)), static_cast<double>(uniform_int(rng, 0, 12))});
    const auto hull = convex_hull(pts);
    // A point is a hull vertex iff some line through it has every other
    // distinct point strictly on one side, excluding points between others.
    std::vector<Point> expected;
    for (const Point& p : pts) {
      bool extreme = true;
      for (const Point& q : pts) {
        for (const Point& r : pts) {
          if (q == p || r == p) continue;
          // p inside triangle or on the open segment qr means not extreme
          if (cross(q - p, r - p) == 0 && dot(q - p, r - p) < 0) extreme = false;
          for (const Point& s : pts) {
            if (s == p || s == q || s == r) continue;
            const double d1 = cross(r - q, p - q), d2 = cross(s - r, p - r), d3 = cross(q - s, p - s);
            const double area = cross(r - q, s - q);
            if (area != 0 && ((d1 >= 0 && d2 >= 0 && d3 >= 0) || (d1 <= 0 && d2 <= 0 && d3 <= 0))) extreme = false;
          }
        }
      }
      if (extreme && std::find(expected.begin(), expected.end(), p) == expected.end()) expected.push_back(p);
    }
    if (expected.size() >= 3) {
      CHECK(hull.size() == expected.size());
      for (const Point& p : expected) CHECK(std::find(hull.begin(), hull.end(), p) != hull.end());
      CHECK(signed_area(hull) > 0.0);
    }
  }
}

TEST_CASE("structural and endpoint distances") {
  const Segment a({0, 0}, {10, 0});
  const Segment b({10, 1}, {0, 2});
  CHECK(structural_distance(a, b) == doctest::Approx(5.0));
  CHECK(structural_distance(a, b) == doctest::Approx(structural_distance(b, a)));
  CHECK(structural_distance(a, a.reversed()) == 0.0);
  CHECK(endpoint_max_distance(a, b) == doctest::Approx(2.0));
  CHECK(point_segment_distance({5, 3}, a) == doctest::Approx(3.0));
  CHECK(point_segment_distance({-3, 4}, a) == doctest::Approx(5.0));
}

TEST_CASE("segment class names") {
  for (SegmentClass c : {SegmentClass::null, SegmentClass::wall, SegmentClass::door, SegmentClass::window}) {
    CHECK(parse_segment_class(to_string(c)) == c);
  }
  CHECK_FALSE(parse_segment_class("stairs"));
}
