#include "glsp/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace glsp {

std::array<double, kBasicInfoSize> basic_info(const Segment& seg, const Canvas& canvas, Rng* rng) {
  Point p = seg.a();
  Point q = seg.b();
  if (rng != nullptr) {
    if (bernoulli(*rng, 0.5)) std::swap(p, q);
  } else if (q.x < p.x || (q.x == p.x && q.y < p.y)) {
    std::swap(p, q);
  }
  const double w = canvas.width;
  const double h = canvas.height;
  const Point mid = seg.midpoint();
  const double len = seg.length();
  return {normalize_coordinate(mid.x, w), normalize_coordinate(mid.y, h),
          normalize_coordinate(p.x, w),   normalize_coordinate(p.y, h),
          normalize_coordinate(q.x, w),   normalize_coordinate(q.y, h),
          len / canvas.diagonal(),        std::abs(q.x - p.x) / len};
}

double sample_bilinear(const FeatureMap& fm, int channel, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(fm.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(fm.height() - 1));
  const int x0 = std::min(static_cast<int>(std::floor(x)), fm.width() - 1);
  const int y0 = std::min(static_cast<int>(std::floor(y)), fm.height() - 1);
  const int x1 = std::min(x0 + 1, fm.width() - 1);
  const int y1 = std::min(y0 + 1, fm.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * fm.at(channel, y0, x0) + fx * fm.at(channel, y0, x1);
  const double bottom = (1.0 - fx) * fm.at(channel, y1, x0) + fx * fm.at(channel, y1, x1);
  return (1.0 - fy) * top + fy * bottom;
}

namespace {

std::vector<double> pool(const FeatureMap& fm, const Segment& seg, std::span<const double> offsets) {
  const Point dir = seg.b() - seg.a();
  const Point normal = (1.0 / seg.length()) * Point{-dir.y, dir.x};
  std::vector<double> out(static_cast<std::size_t>(fm.channels()) * kPooledLength);
  for (int c = 0; c < fm.channels(); ++c) {
    for (int bin = 0; bin < kPooledLength; ++bin) {
      double best = -std::numeric_limits<double>::infinity();
      for (int k = 2 * bin; k < 2 * bin + 2; ++k) {
        const Point on_line = seg.a() + (static_cast<double>(k) / (kAlongSamples - 1)) * dir;
        for (double off : offsets) {
          const Point p = on_line + off * normal;
          best = std::max(best, sample_bilinear(fm, c, p.x, p.y));
        }
      }
      out[static_cast<std::size_t>(c) * kPooledLength + bin] = best;
    }
  }
  return out;
}

}  // namespace

std::vector<double> rroi_pool(const FeatureMap& fm, const Segment& seg) {
  return pool(fm, seg, kNormalOffsets);
}

std::vector<double> loi_pool(const FeatureMap& fm, const Segment& seg) {
  constexpr std::array<double, 1> on_line = {0.0};
  return pool(fm, seg, on_line);
}

std::array<double, kEdgeEmbeddingSize> edge_embedding(Point shared, const Canvas& canvas) {
  return {normalize_coordinate(shared.x, canvas.width), normalize_coordinate(shared.y, canvas.height)};
}

}  // namespace glsp
