#include "glsp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace glsp {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Signed distance-like orientation of p relative to the line through s.
double orient(const Segment& s, Point p) {
  return cross(s.b() - s.a(), p - s.a()) / s.length();
}

bool on_interior(const Segment& s, Point p, double tol) {
  if (std::abs(orient(s, p)) > tol) return false;
  const double len = s.length();
  const double t = dot(p - s.a(), s.b() - s.a()) / len;
  return t > tol && t < len - tol;
}

}  // namespace

double norm(Point p) { return std::hypot(p.x, p.y); }
double distance(Point a, Point b) { return norm(a - b); }
double squared_distance(Point a, Point b) {
  const Point d = a - b;
  return d.x * d.x + d.y * d.y;
}
bool near(Point a, Point b, double tol) { return distance(a, b) <= tol; }

Segment::Segment(Point a, Point b) : a_(a), b_(b) {
  if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(b.x) || !std::isfinite(b.y)) {
    throw std::invalid_argument("segment endpoint is not finite");
  }
  if (a == b) throw std::invalid_argument("zero-length segment");
}

double Segment::length() const { return distance(a_, b_); }
Point Segment::midpoint() const { return 0.5 * (a_ + b_); }

std::string_view to_string(SegmentClass c) {
  switch (c) {
    case SegmentClass::null: return "null";
    case SegmentClass::wall: return "wall";
    case SegmentClass::door: return "door";
    case SegmentClass::window: return "window";
  }
  return "null";
}

std::optional<SegmentClass> parse_segment_class(std::string_view token) {
  if (token == "null") return SegmentClass::null;
  if (token == "wall") return SegmentClass::wall;
  if (token == "door") return SegmentClass::door;
  if (token == "window") return SegmentClass::window;
  return std::nullopt;
}

double axis_angle(const Segment& seg) {
  const Point d = seg.b() - seg.a();
  const double ax = std::abs(d.x);
  const double ay = std::abs(d.y);
  return std::min(std::atan2(ay, ax), std::atan2(ax, ay)) * kRadToDeg;
}

double junction_angle(const Segment& s1, const Segment& s2, Point shared, double tol) {
  auto outgoing = [&](const Segment& s) -> Point {
    if (near(s.a(), shared, tol)) return s.b() - s.a();
    if (near(s.b(), shared, tol)) return s.a() - s.b();
    throw MissingSharedEndpoint("segment does not end at the shared junction");
  };
  const Point u = outgoing(s1);
  const Point v = outgoing(s2);
  return std::abs(std::atan2(cross(u, v), dot(u, v))) * kRadToDeg;
}

bool proper_intersect(const Segment& s1, const Segment& s2, double tol) {
  const double o1 = orient(s1, s2.a());
  const double o2 = orient(s1, s2.b());
  const double o3 = orient(s2, s1.a());
  const double o4 = orient(s2, s1.b());

  const bool s2_straddles = (o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol);
  const bool s1_straddles = (o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol);
  if (s1_straddles && s2_straddles) return true;

  if (on_interior(s1, s2.a(), tol) || on_interior(s1, s2.b(), tol) ||
      on_interior(s2, s1.a(), tol) || on_interior(s2, s1.b(), tol)) {
    return true;
  }

  // Remaining overlap case: collinear segments with coincident endpoints,
  // i.e. the same segment twice.
  const bool same = (near(s1.a(), s2.a(), tol) && near(s1.b(), s2.b(), tol)) ||
                    (near(s1.a(), s2.b(), tol) && near(s1.b(), s2.a(), tol));
  return same;
}

std::optional<Point> crossing_point(const Segment& s1, const Segment& s2, double tol) {
  const Point r = s1.b() - s1.a();
  const Point s = s2.b() - s2.a();
  const double denom = cross(r, s);
  if (std::abs(denom) <= 1e-12 * s1.length() * s2.length()) return std::nullopt;
  const Point qp = s2.a() - s1.a();
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  const double et = tol / s1.length();
  const double eu = tol / s2.length();
  if (t < -et || t > 1.0 + et || u < -eu || u > 1.0 + eu) return std::nullopt;
  return s1.a() + t * r;
}

std::vector<Point> convex_hull(std::vector<Point> points) {
  std::sort(points.begin(), points.end(), [](Point p, Point q) {
    return p.x < q.x || (p.x == q.x && p.y < q.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() <= 2) return points;

  std::vector<Point> hull(2 * points.size());
  std::size_t k = 0;
  for (const Point& p : points) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = points.size() - 1; i-- > 0;) {
    const Point& p = points[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double signed_area(std::span<const Point> polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point& p = polygon[i];
    const Point& q = polygon[(i + 1) % polygon.size()];
    twice += cross(p, q);
  }
  return 0.5 * twice;
}

double point_segment_distance(Point p, const Segment& seg) {
  const Point d = seg.b() - seg.a();
  const double t = std::clamp(dot(p - seg.a(), d) / dot(d, d), 0.0, 1.0);
  return distance(p, seg.a() + t * d);
}

double structural_distance(const Segment& s1, const Segment& s2) {
  const double direct = squared_distance(s1.a(), s2.a()) + squared_distance(s1.b(), s2.b());
  const double swapped = squared_distance(s1.a(), s2.b()) + squared_distance(s1.b(), s2.a());
  return std::min(direct, swapped);
}

double endpoint_max_distance(const Segment& s1, const Segment& s2) {
  const double direct = std::max(distance(s1.a(), s2.a()), distance(s1.b(), s2.b()));
  const double swapped = std::max(distance(s1.a(), s2.b()), distance(s1.b(), s2.a()));
  return std::min(direct, swapped);
}

}  // namespace glsp
