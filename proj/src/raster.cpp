#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "glsp/rng.hpp"
#include "glsp/synthgen.hpp"

namespace glsp {

FeatureMap::FeatureMap(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels < 0 || height < 0 || width < 0) throw std::invalid_argument("negative feature map size");
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

void FeatureMap::append_channels(const FeatureMap& other) {
  if (other.height_ != height_ || other.width_ != width_) {
    throw std::invalid_argument("cannot stack feature maps of different sizes");
  }
  data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  channels_ += other.channels_;
}

namespace {

struct Stroke {
  Segment segment;
  double radius;
};

// Visits every pixel whose center lies within `radius` of the segment.
template <typename Fn>
void for_each_covered(const Stroke& s, int width, int height, Fn&& fn) {
  const Segment& seg = s.segment;
  const double r = s.radius;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(seg.a().x, seg.b().x) - r)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(seg.a().x, seg.b().x) + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(seg.a().y, seg.b().y) - r)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(seg.a().y, seg.b().y) + r)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = point_segment_distance({double(x), double(y)}, seg);
      if (d <= r) fn(x, y, d);
    }
  }
}

void paint(FeatureMap& fm, int x, int y, const Rgb& c) {
  fm.at(0, y, x) = static_cast<float>(c.r);
  fm.at(1, y, x) = static_cast<float>(c.g);
  fm.at(2, y, x) = static_cast<float>(c.b);
}

constexpr double kOutlineWidth = 1.5;

}  // namespace

FeatureMap rasterize(const FloorPlanAnnotation& plan, const StyleConfig& style) {
  style.validate();
  const int w = plan.canvas.width;
  const int h = plan.canvas.height;
  FeatureMap fm(3, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) paint(fm, x, y, style.background);
  }

  std::vector<Stroke> walls;
  for (const AnnotatedLine& line : plan.lines) {
    if (line.cls == SegmentClass::wall) walls.push_back({line.segment, line.thickness / 2.0});
  }
  if (style.wall_mode == WallMode::solid) {
    for (const Stroke& s : walls) {
      for_each_covered(s, w, h, [&](int x, int y, double) { paint(fm, x, y, style.wall); });
    }
  } else {
    // Outline of the union of wall strokes: covered, but not by any stroke
    // shrunk by the outline width.
    std::vector<std::uint8_t> state(static_cast<std::size_t>(w) * h, 0);
    for (const Stroke& s : walls) {
      for_each_covered(s, w, h, [&](int x, int y, double d) {
        auto& v = state[static_cast<std::size_t>(y) * w + x];
        v |= 1;
        if (d < s.radius - kOutlineWidth) v |= 2;
      });
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (state[static_cast<std::size_t>(y) * w + x] == 1) paint(fm, x, y, style.wall);
      }
    }
  }

  for (const AnnotatedLine& line : plan.lines) {
    if (line.cls != SegmentClass::window) continue;
    const Stroke s{line.segment, line.thickness / 2.0};
    // Center line plus both borders.
    for_each_covered(s, w, h, [&](int x, int y, double d) {
      if (d < 0.75 || d > s.radius - 1.0) paint(fm, x, y, style.window);
    });
  }
  for (const AnnotatedLine& line : plan.lines) {
    if (line.cls != SegmentClass::door) continue;
    const Stroke s{line.segment, line.thickness / 2.0};
    for_each_covered(s, w, h, [&](int x, int y, double) { paint(fm, x, y, style.door); });
  }

  if (style.noise > 0.0) {
    Rng rng(derive_seed(style.seed, 0x7015e));
    std::uniform_real_distribution<float> u(static_cast<float>(-style.noise), static_cast<float>(style.noise));
    for (float& v : fm.data()) v = std::clamp(v + u(rng), 0.0f, 1.0f);
  }
  return fm;
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void save_feature_map(const std::filesystem::path& path, const FeatureMap& map, std::string_view magic) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  write_u32(out, static_cast<std::uint32_t>(map.channels()));
  write_u32(out, static_cast<std::uint32_t>(map.height()));
  write_u32(out, static_cast<std::uint32_t>(map.width()));
  out.write(reinterpret_cast<const char*>(map.data().data()),
            static_cast<std::streamsize>(map.data().size() * sizeof(float)));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

FeatureMap load_feature_map(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header(magic.size(), '\0');
  in.read(header.data(), static_cast<std::streamsize>(header.size()));
  if (!in || header != magic) {
    throw std::runtime_error(path.string() + ": bad magic, expected " + std::string(magic));
  }
  const std::uint32_t c = read_u32(in);
  const std::uint32_t h = read_u32(in);
  const std::uint32_t w = read_u32(in);
  if (!in || c > 64 || h > 16384 || w > 16384) throw std::runtime_error(path.string() + ": bad header");
  FeatureMap map(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
  in.read(reinterpret_cast<char*>(map.data().data()),
          static_cast<std::streamsize>(map.data().size() * sizeof(float)));
  if (!in) throw std::runtime_error(path.string() + ": truncated data");
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error(path.string() + ": trailing bytes");
  return map;
}

}  // namespace glsp
