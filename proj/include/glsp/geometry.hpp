#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace glsp {

// Exact synthetic data sits on the pixel grid; detected junctions may need a
// looser value, so every consumer takes the tolerance as a parameter.
inline constexpr double kSnapTolerance = 1e-6;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point p);
double distance(Point a, Point b);
double squared_distance(Point a, Point b);
bool near(Point a, Point b, double tol = kSnapTolerance);

/// A non-degenerate line segment. Construction rejects a == b.
class Segment {
 public:
  Segment(Point a, Point b);

  const Point& a() const { return a_; }
  const Point& b() const { return b_; }
  double length() const;
  Point midpoint() const;
  Segment reversed() const { return Segment(b_, a_); }

  friend bool operator==(const Segment&, const Segment&) = default;

 private:
  Point a_;
  Point b_;
};

enum class SegmentClass : std::uint8_t { null = 0, wall = 1, door = 2, window = 3 };
inline constexpr int kNumClasses = 4;
inline constexpr std::array<SegmentClass, 3> kMeaningfulClasses = {
    SegmentClass::wall, SegmentClass::door, SegmentClass::window};

std::string_view to_string(SegmentClass c);
std::optional<SegmentClass> parse_segment_class(std::string_view token);
inline int class_index(SegmentClass c) { return static_cast<int>(c); }
inline bool is_meaningful(SegmentClass c) { return c != SegmentClass::null; }

class MissingSharedEndpoint : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Smallest angle in degrees between the segment direction and the four axis
/// unit vectors. Always in [0, 45].
double axis_angle(const Segment& seg);

/// Angle in degrees in [0, 180] between the two directions leaving `shared`.
/// Throws MissingSharedEndpoint when either segment does not end at `shared`.
double junction_angle(const Segment& s1, const Segment& s2, Point shared,
                      double tol = kSnapTolerance);

/// True when the open interiors cross, an interior contains the other
/// segment's endpoint, or collinear segments overlap with positive length.
/// Contact at a shared endpoint only is not an intersection.
bool proper_intersect(const Segment& s1, const Segment& s2, double tol = kSnapTolerance);

/// Intersection point of the two supporting lines restricted to both
/// segments, if the segments cross at a single point.
std::optional<Point> crossing_point(const Segment& s1, const Segment& s2,
                                    double tol = kSnapTolerance);

/// Andrew's monotone chain. Vertices in counter-clockwise order (positive
/// signed area in x-right/y-up orientation), starting from the lowest-x point.
/// Collinear input yields the two extreme points.
std::vector<Point> convex_hull(std::vector<Point> points);

double signed_area(std::span<const Point> polygon);
double point_segment_distance(Point p, const Segment& seg);

/// Sum of squared endpoint distances, minimized over the two pairings.
double structural_distance(const Segment& s1, const Segment& s2);

/// Largest endpoint distance under the best pairing.
double endpoint_max_distance(const Segment& s1, const Segment& s2);

}  // namespace glsp
