#include "glsp/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>

#include "glsp/rng.hpp"

namespace glsp {

namespace {

struct Rect {
  int x0, y0, x1, y1;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
};

using IPoint = std::pair<int, int>;  // (x, y)

// One boundary piece between consecutive junctions.
struct Piece {
  IPoint a;
  IPoint b;
  std::vector<int> rooms;
  bool inclined = false;
  std::optional<SegmentClass> opening;
  int opening_start = 0;  // offset from a along the piece
  int opening_width = 0;

  bool exterior() const { return rooms.size() == 1; }
  int length() const { return std::abs(b.first - a.first) + std::abs(b.second - a.second); }
};

const std::vector<std::string> kRoomCategories = {
    "living_room", "bedroom", "kitchen", "bathroom", "balcony", "dining_room", "aisle", "study"};

double snap_half(double v) { return std::round(v * 2.0) / 2.0; }

bool admissible(int coord, const std::vector<int>& existing, int gap) {
  for (int e : existing) {
    const int d = std::abs(e - coord);
    if (d != 0 && d < gap) return false;
  }
  return true;
}

// Junction coordinates (corners of every rectangle) lying on a given line.
std::vector<int> junctions_on_horizontal(const std::vector<Rect>& rects, int y) {
  std::vector<int> xs;
  for (const Rect& r : rects) {
    if (r.y0 == y || r.y1 == y) {
      xs.push_back(r.x0);
      xs.push_back(r.x1);
    }
  }
  return xs;
}

std::vector<int> junctions_on_vertical(const std::vector<Rect>& rects, int x) {
  std::vector<int> ys;
  for (const Rect& r : rects) {
    if (r.x0 == x || r.x1 == x) {
      ys.push_back(r.y0);
      ys.push_back(r.y1);
    }
  }
  return ys;
}

struct SplitOption {
  std::size_t rect;
  bool vertical;  // split line is x = pos
  std::vector<int> positions;
};

std::vector<Rect> partition(Rng& rng, const GeneratorConfig& cfg, int target) {
  const int m = cfg.margin;
  std::vector<Rect> rects = {{m, m, cfg.canvas.width - 1 - m, cfg.canvas.height - 1 - m}};
  while (static_cast<int>(rects.size()) < target) {
    std::vector<SplitOption> options;
    std::vector<double> weights;
    for (std::size_t i = 0; i < rects.size(); ++i) {
      const Rect& r = rects[i];
      for (bool vertical : {true, false}) {
        SplitOption opt{i, vertical, {}};
        if (vertical) {
          const auto top = junctions_on_horizontal(rects, r.y0);
          const auto bottom = junctions_on_horizontal(rects, r.y1);
          for (int p = r.x0 + cfg.min_room_size; p <= r.x1 - cfg.min_room_size; ++p) {
            if (admissible(p, top, cfg.min_junction_gap) &&
                admissible(p, bottom, cfg.min_junction_gap)) {
              opt.positions.push_back(p);
            }
          }
        } else {
          const auto left = junctions_on_vertical(rects, r.x0);
          const auto right = junctions_on_vertical(rects, r.x1);
          for (int p = r.y0 + cfg.min_room_size; p <= r.y1 - cfg.min_room_size; ++p) {
            if (admissible(p, left, cfg.min_junction_gap) &&
                admissible(p, right, cfg.min_junction_gap)) {
              opt.positions.push_back(p);
            }
          }
        }
        if (opt.positions.empty()) continue;
        // Prefer cutting across the longer side.
        const bool along_long = vertical ? r.width() >= r.height() : r.height() >= r.width();
        weights.push_back(static_cast<double>(r.width()) * r.height() * (along_long ? 4.0 : 1.0));
        options.push_back(std::move(opt));
      }
    }
    if (options.empty()) break;
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    const SplitOption& opt = options[pick(rng)];
    const int pos = opt.positions[uniform_int(rng, 0, static_cast<int>(opt.positions.size()) - 1)];
    Rect r = rects[opt.rect];
    Rect first = r;
    Rect second = r;
    if (opt.vertical) {
      first.x1 = pos;
      second.x0 = pos;
    } else {
      first.y1 = pos;
      second.y0 = pos;
    }
    rects[opt.rect] = first;
    rects.push_back(second);
  }
  return rects;
}

std::pair<IPoint, IPoint> ordered(IPoint a, IPoint b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// Splits every rectangle edge at the junctions lying strictly inside it.
std::map<std::pair<IPoint, IPoint>, Piece> build_pieces(const std::vector<Rect>& rects) {
  std::set<IPoint> junctions;
  for (const Rect& r : rects) {
    junctions.insert({r.x0, r.y0});
    junctions.insert({r.x1, r.y0});
    junctions.insert({r.x1, r.y1});
    junctions.insert({r.x0, r.y1});
  }
  std::map<std::pair<IPoint, IPoint>, Piece> pieces;
  for (std::size_t ri = 0; ri < rects.size(); ++ri) {
    const Rect& r = rects[ri];
    const std::array<std::pair<IPoint, IPoint>, 4> edges = {{
        {{r.x0, r.y0}, {r.x1, r.y0}},
        {{r.x0, r.y1}, {r.x1, r.y1}},
        {{r.x0, r.y0}, {r.x0, r.y1}},
        {{r.x1, r.y0}, {r.x1, r.y1}},
    }};
    for (const auto& [a, b] : edges) {
      std::vector<IPoint> stops;
      for (const IPoint& j : junctions) {
        const bool on_edge = (a.second == b.second)
                                 ? (j.second == a.second && j.first >= a.first && j.first <= b.first)
                                 : (j.first == a.first && j.second >= a.second && j.second <= b.second);
        if (on_edge) stops.push_back(j);
      }
      std::sort(stops.begin(), stops.end());
      for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
        auto key = ordered(stops[k], stops[k + 1]);
        auto [it, inserted] = pieces.try_emplace(key);
        if (inserted) {
          it->second.a = key.first;
          it->second.b = key.second;
        }
        it->second.rooms.push_back(static_cast<int>(ri));
      }
    }
  }
  return pieces;
}

// Places an opening inside a piece so that the wall stubs on either side are
// empty or at least `gap` long. Returns false if nothing fits.
bool place_opening(Rng& rng, Piece& piece, SegmentClass cls, Range width, int gap) {
  const int length = piece.length();
  const int lo = static_cast<int>(std::ceil(width.lo));
  int hi = std::min(static_cast<int>(std::floor(width.hi)), length);
  if (hi < lo) return false;
  const int first = uniform_int(rng, lo, hi);
  for (int w = first; w >= lo; --w) {
    std::vector<int> starts;
    for (int s = 0; s <= length - w; ++s) {
      const int rest = length - w - s;
      if ((s == 0 || s >= gap) && (rest == 0 || rest >= gap)) starts.push_back(s);
    }
    if (starts.empty()) continue;
    piece.opening = cls;
    piece.opening_width = w;
    piece.opening_start = starts[uniform_int(rng, 0, static_cast<int>(starts.size()) - 1)];
    return true;
  }
  return false;
}

bool can_host(const Piece& piece, Range width, int gap) {
  if (piece.inclined || piece.opening) return false;
  const int length = piece.length();
  const int lo = static_cast<int>(std::ceil(width.lo));
  if (length < lo) return false;
  for (int s = 0; s <= length - lo; ++s) {
    const int rest = length - lo - s;
    if ((s == 0 || s >= gap) && (rest == 0 || rest >= gap)) return true;
  }
  return false;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

Point to_point(IPoint p) { return {static_cast<double>(p.first), static_cast<double>(p.second)}; }

}  // namespace

double Canvas::diagonal() const { return std::hypot(width, height); }

bool Canvas::contains(Point p) const {
  return p.x >= 0.0 && p.y >= 0.0 && p.x < width && p.y < height;
}

void FloorPlanAnnotation::validate() const {
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  for (const AnnotatedLine& line : lines) {
    if (!is_meaningful(line.cls)) throw std::invalid_argument("annotated line has class null");
    if (!canvas.contains(line.segment.a()) || !canvas.contains(line.segment.b())) {
      throw std::invalid_argument("annotated line leaves the canvas");
    }
  }
  for (const Room& room : rooms) {
    if (room.contour.size() < 3) throw std::invalid_argument("room contour has fewer than 3 points");
    for (const Point& p : room.contour) {
      if (!canvas.contains(p)) throw std::invalid_argument("room contour leaves the canvas");
    }
  }
}

std::size_t FloorPlanAnnotation::count(SegmentClass c) const {
  return static_cast<std::size_t>(std::count_if(
      lines.begin(), lines.end(), [c](const AnnotatedLine& l) { return l.cls == c; }));
}

void GeneratorConfig::validate() const {
  const int inner_w = canvas.width - 1 - 2 * margin;
  const int inner_h = canvas.height - 1 - 2 * margin;
  if (canvas.width <= 0 || canvas.height <= 0 || margin < 0) {
    throw std::invalid_argument("canvas must be positive and margin non-negative");
  }
  if (min_room_size <= 0 || inner_w < min_room_size || inner_h < min_room_size) {
    throw std::invalid_argument("minimum room size does not fit the canvas");
  }
  if (min_rooms < 1 || max_rooms < min_rooms) throw std::invalid_argument("invalid room-count range");
  if (min_junction_gap < 1) throw std::invalid_argument("junction gap must be at least 1 px");
  for (const Range* r : {&door_width, &window_width, &chamfer_size, &exterior_wall_thickness,
                         &interior_wall_thickness, &door_thickness, &window_thickness, &scale}) {
    if (r->lo <= 0.0 || r->hi < r->lo) throw std::invalid_argument("invalid range in generator config");
  }
  for (double p : {extra_door_probability, window_probability, inclined_wall_probability}) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("probability outside [0, 1]");
  }
}

FloorPlanAnnotation generate_plan(std::uint64_t seed, const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng(mix_seed(seed));

  const int target = uniform_int(rng, cfg.min_rooms, cfg.max_rooms);
  const std::vector<Rect> rects = partition(rng, cfg, target);
  auto pieces = build_pieces(rects);

  std::vector<std::vector<Point>> contours;
  for (const Rect& r : rects) {
    contours.push_back({{double(r.x0), double(r.y0)},
                        {double(r.x1), double(r.y0)},
                        {double(r.x1), double(r.y1)},
                        {double(r.x0), double(r.y1)}});
  }

  // Optional inclined wall: cut one outer corner.
  if (bernoulli(rng, cfg.inclined_wall_probability)) {
    const Rect outer = {cfg.margin, cfg.margin, cfg.canvas.width - 1 - cfg.margin,
                        cfg.canvas.height - 1 - cfg.margin};
    const std::array<IPoint, 4> corners = {
        {{outer.x0, outer.y0}, {outer.x1, outer.y0}, {outer.x1, outer.y1}, {outer.x0, outer.y1}}};
    const IPoint corner = corners[uniform_int(rng, 0, 3)];
    Piece* horizontal = nullptr;
    Piece* vertical = nullptr;
    for (auto& [key, piece] : pieces) {
      if (piece.a != corner && piece.b != corner) continue;
      (piece.a.second == piece.b.second ? horizontal : vertical) = &piece;
    }
    const int gap = cfg.min_junction_gap;
    const int lo = static_cast<int>(std::ceil(cfg.chamfer_size.lo));
    const int hi_h = std::min(static_cast<int>(cfg.chamfer_size.hi), horizontal->length() - gap);
    const int hi_v = std::min(static_cast<int>(cfg.chamfer_size.hi), vertical->length() - gap);
    if (hi_h >= lo && hi_v >= lo) {
      const int ch = uniform_int(rng, lo, hi_h);
      const int cv = uniform_int(rng, lo, hi_v);
      const int sx = corner.first == outer.x0 ? 1 : -1;
      const int sy = corner.second == outer.y0 ? 1 : -1;
      const IPoint ph = {corner.first + sx * ch, corner.second};
      const IPoint pv = {corner.first, corner.second + sy * cv};
      const int room = horizontal->rooms.front();

      Piece h = *horizontal;
      Piece v = *vertical;
      pieces.erase(ordered(h.a, h.b));
      pieces.erase(ordered(v.a, v.b));
      (h.a == corner ? h.a : h.b) = ph;
      (v.a == corner ? v.a : v.b) = pv;
      auto hk = ordered(h.a, h.b);
      h.a = hk.first;
      h.b = hk.second;
      auto vk = ordered(v.a, v.b);
      v.a = vk.first;
      v.b = vk.second;
      pieces.emplace(hk, h);
      pieces.emplace(vk, v);
      Piece slanted;
      auto sk = ordered(ph, pv);
      slanted.a = sk.first;
      slanted.b = sk.second;
      slanted.rooms = {room};
      slanted.inclined = true;
      pieces.emplace(sk, slanted);

      auto& contour = contours[room];
      const Point cp = to_point(corner);
      for (std::size_t k = 0; k < contour.size(); ++k) {
        if (contour[k] != cp) continue;
        const Point prev = contour[(k + contour.size() - 1) % contour.size()];
        // Keep the contour order: the cut point on the edge towards `prev`
        // comes first.
        const Point cut_h = to_point(ph);
        const Point cut_v = to_point(pv);
        const bool prev_is_horizontal = prev.y == cp.y;
        contour[k] = prev_is_horizontal ? cut_h : cut_v;
        contour.insert(contour.begin() + static_cast<std::ptrdiff_t>(k) + 1,
                       prev_is_horizontal ? cut_v : cut_h);
        break;
      }
    }
  }

  const int gap = cfg.min_junction_gap;
  std::vector<Piece*> order;
  for (auto& [key, piece] : pieces) order.push_back(&piece);

  // Doors along a random spanning tree of the room adjacency graph.
  std::vector<Piece*> interior;
  for (Piece* p : order) {
    if (!p->exterior()) interior.push_back(p);
  }
  std::shuffle(interior.begin(), interior.end(), rng);
  std::vector<int> parent(rects.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::set<std::pair<int, int>> door_pairs;
  for (Piece* p : interior) {
    const int ra = find_root(parent, p->rooms[0]);
    const int rb = find_root(parent, p->rooms[1]);
    if (ra == rb || !can_host(*p, cfg.door_width, gap)) continue;
    if (place_opening(rng, *p, SegmentClass::door, cfg.door_width, gap)) {
      parent[ra] = rb;
      door_pairs.insert(std::minmax(p->rooms[0], p->rooms[1]));
    }
  }
  for (Piece* p : interior) {
    const auto pair = std::minmax(p->rooms[0], p->rooms[1]);
    if (door_pairs.count(pair) || !can_host(*p, cfg.door_width, gap)) continue;
    if (bernoulli(rng, cfg.extra_door_probability) &&
        place_opening(rng, *p, SegmentClass::door, cfg.door_width, gap)) {
      door_pairs.insert(pair);
    }
  }

  std::vector<Piece*> exterior;
  for (Piece* p : order) {
    if (p->exterior()) exterior.push_back(p);
  }
  if (cfg.entrance_door) {
    std::vector<Piece*> hosts;
    for (Piece* p : exterior) {
      if (can_host(*p, cfg.door_width, gap)) hosts.push_back(p);
    }
    if (!hosts.empty()) {
      Piece* p = hosts[uniform_int(rng, 0, static_cast<int>(hosts.size()) - 1)];
      place_opening(rng, *p, SegmentClass::door, cfg.door_width, gap);
    }
  }
  for (Piece* p : exterior) {
    if (!can_host(*p, cfg.window_width, gap)) continue;
    if (bernoulli(rng, cfg.window_probability)) {
      place_opening(rng, *p, SegmentClass::window, cfg.window_width, gap);
    }
  }

  FloorPlanAnnotation plan;
  plan.canvas = cfg.canvas;
  plan.scale = snap_half(uniform(rng, cfg.scale.lo, cfg.scale.hi) * 10.0) / 10.0;
  const double ext_t = snap_half(uniform(rng, cfg.exterior_wall_thickness.lo, cfg.exterior_wall_thickness.hi));
  const double int_t = snap_half(uniform(rng, cfg.interior_wall_thickness.lo, cfg.interior_wall_thickness.hi));
  const double door_t = snap_half(uniform(rng, cfg.door_thickness.lo, cfg.door_thickness.hi));
  const double window_t = snap_half(uniform(rng, cfg.window_thickness.lo, cfg.window_thickness.hi));

  for (const Piece* p : order) {
    const Point a = to_point(p->a);
    const Point b = to_point(p->b);
    const double wall_t = p->exterior() ? ext_t : int_t;
    if (!p->opening) {
      plan.lines.push_back({Segment(a, b), wall_t, SegmentClass::wall});
      continue;
    }
    const Point dir = (1.0 / p->length()) * (b - a);
    const Point s = a + static_cast<double>(p->opening_start) * dir;
    const Point e = s + static_cast<double>(p->opening_width) * dir;
    if (s != a) plan.lines.push_back({Segment(a, s), wall_t, SegmentClass::wall});
    const double t = *p->opening == SegmentClass::door ? door_t : window_t;
    plan.lines.push_back({Segment(s, e), t, *p->opening});
    if (e != b) plan.lines.push_back({Segment(e, b), wall_t, SegmentClass::wall});
  }

  for (std::size_t i = 0; i < contours.size(); ++i) {
    const auto& cat = kRoomCategories[uniform_int(rng, 0, static_cast<int>(kRoomCategories.size()) - 1)];
    plan.rooms.push_back({cat, contours[i]});
  }
  plan.validate();
  return plan;
}

void StyleConfig::validate() const {
  for (const Rgb* c : {&wall, &door, &window, &background}) {
    for (double v : {c->r, c->g, c->b}) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("style color outside [0, 1]");
    }
  }
  for (const Rgb* c : {&wall, &door, &window}) {
    const double contrast = std::max({std::abs(c->r - background.r), std::abs(c->g - background.g),
                                      std::abs(c->b - background.b)});
    if (contrast < kMinContrast) throw std::invalid_argument("line color too close to background");
  }
  if (!(noise >= 0.0 && noise <= 1.0)) throw std::invalid_argument("noise amplitude outside [0, 1]");
}

StyleConfig sample_style(std::uint64_t seed, const StyleVariation& variation) {
  Rng rng(derive_seed(seed, 0x5717e));
  StyleConfig base;
  StyleConfig style = base;
  auto jitter = [&](Rgb c) {
    auto j = [&](double v) { return std::clamp(v + uniform(rng, -variation.color_jitter, variation.color_jitter), 0.0, 1.0); };
    return Rgb{j(c.r), j(c.g), j(c.b)};
  };
  const double bg = uniform(rng, 0.9, 1.0);
  style.background = {bg, bg, bg};
  style.wall = jitter(base.wall);
  style.door = jitter(base.door);
  style.window = jitter(base.window);
  style.wall_mode = bernoulli(rng, variation.hollow_probability) ? WallMode::hollow : WallMode::solid;
  style.noise = uniform(rng, variation.noise.lo, std::max(variation.noise.lo, variation.noise.hi));
  style.seed = derive_seed(seed, 0x4015e);
  try {
    style.validate();
  } catch (const std::invalid_argument&) {
    base.seed = style.seed;
    base.noise = style.noise;
    return base;
  }
  return style;
}

}  // namespace glsp
