#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "glsp/eval.hpp"

namespace glsp {

namespace {

struct Piece {
  Point a;
  Point b;
  bool door = false;
};

// Every segment is cut wherever another segment crosses it or touches its
// interior, so the pieces only meet at their endpoints.
std::vector<Piece> split_pieces(std::span<const ScoredSegment> segs, double snap) {
  std::vector<Piece> out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i].segment;
    const Point d = s.b() - s.a();
    const double len2 = dot(d, d);
    std::vector<double> cuts = {0.0, 1.0};
    auto add_point = [&](Point p) {
      if (point_segment_distance(p, s) > snap) return;
      const double t = std::clamp(dot(p - s.a(), d) / len2, 0.0, 1.0);
      cuts.push_back(t);
    };
    for (std::size_t j = 0; j < segs.size(); ++j) {
      if (i == j) continue;
      const Segment& o = segs[j].segment;
      add_point(o.a());
      add_point(o.b());
      if (auto x = crossing_point(s, o)) add_point(*x);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const Point p = s.a() + cuts[k] * d;
      const Point q = s.a() + cuts[k + 1] * d;
      if (distance(p, q) <= snap) continue;
      out.push_back({p, q, segs[i].cls == SegmentClass::door});
    }
  }
  return out;
}

class VertexTable {
 public:
  explicit VertexTable(double snap) : snap_(snap) {}

  std::size_t id(Point p) {
    for (std::size_t k = 0; k < points_.size(); ++k) {
      if (distance(points_[k], p) <= snap_) return k;
    }
    points_.push_back(p);
    return points_.size() - 1;
  }
  const std::vector<Point>& points() const { return points_; }

 private:
  double snap_;
  std::vector<Point> points_;
};

}  // namespace

RoomCount count_rooms(std::span<const ScoredSegment> segments, double snap) {
  std::vector<ScoredSegment> meaningful;
  for (const auto& s : segments) {
    if (is_meaningful(s.cls)) meaningful.push_back(s);
  }
  VertexTable vertices(snap);
  std::map<std::pair<std::size_t, std::size_t>, bool> edges;  // -> has door
  for (const Piece& piece : split_pieces(meaningful, snap)) {
    const std::size_t u = vertices.id(piece.a);
    const std::size_t v = vertices.id(piece.b);
    if (u == v) continue;
    auto [it, inserted] = edges.try_emplace(std::minmax(u, v), piece.door);
    if (!inserted) it->second = it->second || piece.door;
  }

  const auto& pts = vertices.points();
  // Half-edges 2e (u -> v) and 2e + 1 (v -> u).
  std::vector<std::size_t> from;
  std::vector<std::size_t> to;
  std::vector<bool> door;
  for (const auto& [key, has_door] : edges) {
    from.push_back(key.first);
    to.push_back(key.second);
    from.push_back(key.second);
    to.push_back(key.first);
    door.push_back(has_door);
    door.push_back(has_door);
  }
  const std::size_t halves = from.size();
  std::vector<std::vector<std::size_t>> outgoing(pts.size());
  for (std::size_t h = 0; h < halves; ++h) outgoing[from[h]].push_back(h);
  auto angle = [&](std::size_t h) {
    const Point d = pts[to[h]] - pts[from[h]];
    return std::atan2(d.y, d.x);
  };
  std::vector<std::size_t> position(halves);
  for (auto& list : outgoing) {
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) { return angle(a) < angle(b); });
    for (std::size_t k = 0; k < list.size(); ++k) position[list[k]] = k;
  }
  // Next half-edge around a face: at the head vertex, the outgoing edge just
  // clockwise of the twin. Bounded faces then come out counter-clockwise.
  auto next = [&](std::size_t h) {
    const std::size_t twin = h ^ 1;
    const auto& list = outgoing[from[twin]];
    const std::size_t k = position[twin];
    return list[(k + list.size() - 1) % list.size()];
  };

  RoomCount count;
  std::vector<bool> visited(halves, false);
  for (std::size_t start = 0; start < halves; ++start) {
    if (visited[start]) continue;
    double area2 = 0.0;
    bool has_door = false;
    std::size_t h = start;
    do {
      visited[h] = true;
      area2 += cross(pts[from[h]], pts[to[h]]);
      has_door = has_door || door[h];
      h = next(h);
    } while (h != start);
    if (area2 > 1e-9) {
      ++count.enclosed;
      if (has_door) ++count.with_door;
    }
  }
  return count;
}

RoomCount count_rooms(const FloorPlanAnnotation& plan, double snap) {
  std::vector<ScoredSegment> segs;
  for (const auto& l : plan.lines) segs.push_back({l.segment, l.cls, 1.0});
  return count_rooms(segs, snap);
}

}  // namespace glsp
